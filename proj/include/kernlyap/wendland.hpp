#pragma once

#include <vector>

#include <Eigen/Core>

#include "kernlyap/rational_polynomial.hpp"

namespace kernlyap {

/// Radial profile values at a distance s = ||x - y||, with the scale c
/// already applied:
///   psi  = psi_{l,k}(c s)
///   psi1 = (d/ds psi(c s)) / s
///   psi2 = (d/ds psi1(s)) / s
/// so that grad_x K(x,y) = psi1 (x - y) and
/// d^2 K / dx dy = -[psi2 (x - y)(x - y)^T + psi1 I].
struct RadialDerivatives {
  double psi = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
};

/// Wendland's compactly supported kernel K(x,y) = psi_{l,k}(c ||x - y||) with
/// l = floor(d/2) + k + 1. The profile is built by the exact rational
/// recursion psi_{l,0}(r) = (1-r)^l_+, psi_{l,k+1}(r) = int_r^1 t psi_{l,k}(t) dt.
///
/// Immutable after construction; all evaluation is thread-safe.
class WendlandKernel {
 public:
  /// Throws UsageError unless d >= 1, k >= 0 and c > 0.
  WendlandKernel(int dimension, int smoothness, double scale = 1.0);

  int dimension() const noexcept { return dimension_; }
  int smoothness() const noexcept { return smoothness_; }
  int recursion_index() const noexcept { return recursion_index_; }
  double scale() const noexcept { return scale_; }
  double support_radius() const noexcept { return 1.0 / scale_; }

  /// Same profile, different scale.
  WendlandKernel rescaled(double scale) const;

  /// Exact psi_{l,k} on [0, 1].
  const RationalPolynomial& profile() const noexcept { return profile_; }
  /// Exact psi'(r)/r; requires k >= 1.
  const RationalPolynomial& first_quotient() const;
  /// Exact (psi'(r)/r)'/r; requires k >= 2.
  const RationalPolynomial& second_quotient() const;

  /// psi_{l,k}(r) for the unscaled radius r.
  double profile_value(double r) const noexcept;

  /// K(x, x) = psi(0).
  double kappa_squared() const noexcept;

  /// psi(c s) for a distance s.
  double at_distance(double s) const noexcept;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) const noexcept;

  /// Values of the radial profile and its quotients at distance s. `order`
  /// selects how many quotients to compute (0, 1 or 2); throws
  /// SmoothnessError when order > k.
  RadialDerivatives radial_derivatives(double s, int order = 2) const;

  /// grad_x K(x, y).
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y) const;

 private:
  int dimension_;
  int smoothness_;
  int recursion_index_;
  double scale_;
  RationalPolynomial profile_;
  RationalPolynomial quotient1_;
  RationalPolynomial quotient2_;
  // Float coefficients in the reflected variable u = 1 - r, which keeps
  // relative accuracy near the edge of the support.
  std::vector<double> profile_u_;
  std::vector<double> quotient1_u_;
  std::vector<double> quotient2_u_;
};

/// Builds psi_{l,k} for l = floor(d/2) + k + 1 by exact recursion.
RationalPolynomial wendland_profile(int dimension, int smoothness);

/// Free-function form of the kernel factory.
inline WendlandKernel build_wendland(int dimension, int smoothness, double scale = 1.0) {
  return WendlandKernel(dimension, smoothness, scale);
}

}  // namespace kernlyap
