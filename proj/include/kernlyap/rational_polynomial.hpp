#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace kernlyap {

using Rational = boost::multiprecision::cpp_rational;

/// Univariate polynomial with exact rational coefficients, stored in
/// increasing-degree order. Trailing zero coefficients are trimmed, the zero
/// polynomial has no coefficients.
class RationalPolynomial {
 public:
  RationalPolynomial() = default;
  explicit RationalPolynomial(std::vector<Rational> coeffs);
  RationalPolynomial(std::initializer_list<Rational> coeffs);

  /// (a + b r)^n
  static RationalPolynomial binomial_power(const Rational& a, const Rational& b,
                                           unsigned n);

  const std::vector<Rational>& coefficients() const noexcept { return coeffs_; }
  /// Coefficient of r^i (zero past the degree).
  Rational coefficient(std::size_t i) const;
  /// Degree; -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }

  Rational operator()(const Rational& r) const;

  RationalPolynomial derivative() const;
  /// Antiderivative with zero constant term.
  RationalPolynomial antiderivative() const;
  /// p(r) / r. Requires p(0) == 0 exactly; throws std::domain_error otherwise.
  RationalPolynomial divide_by_r() const;
  /// q(u) := p(1 - u).
  RationalPolynomial reflect_about_one() const;

  RationalPolynomial operator*(const RationalPolynomial& rhs) const;
  RationalPolynomial operator-(const RationalPolynomial& rhs) const;
  RationalPolynomial operator-() const;
  friend bool operator==(const RationalPolynomial&, const RationalPolynomial&) = default;

  std::vector<double> to_double() const;
  std::string to_string() const;

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

}  // namespace kernlyap
