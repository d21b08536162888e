#include "kernlyap/wendland.hpp"

#include <cmath>
#include <string>

#include "kernlyap/errors.hpp"

namespace kernlyap {

namespace {

double horner(const std::vector<double>& c, double u) noexcept {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = std::fma(acc, u, *it);
  return acc;
}

}  // namespace

RationalPolynomial wendland_profile(int dimension, int smoothness) {
  if (dimension < 1) throw UsageError("Wendland kernel: dimension must be >= 1");
  if (smoothness < 0) throw UsageError("Wendland kernel: smoothness index must be >= 0");
  const unsigned l = static_cast<unsigned>(dimension / 2 + smoothness + 1);
  RationalPolynomial psi = RationalPolynomial::binomial_power(1, -1, l);
  const RationalPolynomial t{Rational(0), Rational(1)};
  for (int j = 0; j < smoothness; ++j) {
    // int_r^1 t psi(t) dt = P(1) - P(r)
    const RationalPolynomial antideriv = (t * psi).antiderivative();
    psi = RationalPolynomial{antideriv(Rational(1))} - antideriv;
  }
  return psi;
}

WendlandKernel::WendlandKernel(int dimension, int smoothness, double scale)
    : dimension_(dimension),
      smoothness_(smoothness),
      recursion_index_(dimension / 2 + smoothness + 1),
      scale_(scale),
      profile_(wendland_profile(dimension, smoothness)) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw UsageError("Wendland kernel: scale must be positive and finite");
  }
  profile_u_ = profile_.reflect_about_one().to_double();
  if (smoothness_ >= 1) {
    quotient1_ = profile_.derivative().divide_by_r();
    quotient1_u_ = quotient1_.reflect_about_one().to_double();
  }
  if (smoothness_ >= 2) {
    quotient2_ = quotient1_.derivative().divide_by_r();
    quotient2_u_ = quotient2_.reflect_about_one().to_double();
  }
}

WendlandKernel WendlandKernel::rescaled(double scale) const {
  WendlandKernel copy = *this;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw UsageError("Wendland kernel: scale must be positive and finite");
  }
  copy.scale_ = scale;
  return copy;
}

const RationalPolynomial& WendlandKernel::first_quotient() const {
  if (smoothness_ < 1) {
    throw SmoothnessError("psi'(r)/r needs smoothness index k >= 1, kernel has k = " +
                          std::to_string(smoothness_));
  }
  return quotient1_;
}

const RationalPolynomial& WendlandKernel::second_quotient() const {
  if (smoothness_ < 2) {
    throw SmoothnessError("second radial quotient needs smoothness index k >= 2, kernel has k = " +
                          std::to_string(smoothness_));
  }
  return quotient2_;
}

double WendlandKernel::profile_value(double r) const noexcept {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  return horner(profile_u_, 1.0 - r);
}

double WendlandKernel::kappa_squared() const noexcept { return horner(profile_u_, 1.0); }

double WendlandKernel::at_distance(double s) const noexcept { return profile_value(scale_ * s); }

double WendlandKernel::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) const noexcept {
  return at_distance((x - y).norm());
}

RadialDerivatives WendlandKernel::radial_derivatives(double s, int order) const {
  if (order > smoothness_) {
    throw SmoothnessError("radial derivative of order " + std::to_string(order) +
                          " needs smoothness index k >= " + std::to_string(order) +
                          ", kernel has k = " + std::to_string(smoothness_));
  }
  RadialDerivatives out;
  const double r = scale_ * std::abs(s);
  if (r >= 1.0) return out;
  const double u = 1.0 - r;
  const double c2 = scale_ * scale_;
  out.psi = horner(profile_u_, u);
  if (order >= 1) out.psi1 = c2 * horner(quotient1_u_, u);
  if (order >= 2) out.psi2 = c2 * c2 * horner(quotient2_u_, u);
  return out;
}

Eigen::VectorXd WendlandKernel::gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                         const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const Eigen::VectorXd diff = x - y;
  return radial_derivatives(diff.norm(), 1).psi1 * diff;
}

}  // namespace kernlyap
