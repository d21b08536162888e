#pragma once

#include <stdexcept>
#include <string>

namespace kernlyap {

/// Invalid input or configuration. Maps to CLI exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical step failed (factorization, screening, integration).
/// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two sites/collocation points coincide (closer than the duplicate tolerance).
class DuplicateSiteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested a radial derivative quotient the kernel's smoothness cannot supply.
class SmoothnessError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Factorization of a kernel system failed. Carries a condition estimate.
class FactorizationError : public NumericalError {
 public:
  FactorizationError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace kernlyap
