#include "kernlyap/wendland.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <gtest/gtest.h>

#include "kernlyap/errors.hpp"

namespace kernlyap {
namespace {

Rational q(int num, int den = 1) { return Rational(num) / Rational(den); }

RationalPolynomial one_minus_r_pow(unsigned n) {
  return RationalPolynomial::binomial_power(q(1), q(-1), n);
}

TEST(WendlandProfileTest, BaseCase) {
  // d = 1, k = 0 -> l = 1: psi = (1 - r)
  const RationalPolynomial p = wendland_profile(1, 0);
  EXPECT_EQ(p, (RationalPolynomial{q(1), q(-1)}));
  EXPECT_EQ(p(q(0)), q(1));
  EXPECT_EQ(p(q(1)), q(0));
}

TEST(WendlandProfileTest, OneStepFromSquare) {
  // d = 1, k = 1 -> l = 2.
  const RationalPolynomial p = wendland_profile(1, 1);
  EXPECT_EQ(p, (RationalPolynomial{q(1, 12), q(0), q(-1, 2), q(2, 3), q(-1, 4)}));
}

TEST(WendlandProfileTest, MatchesFactoredClosedForms) {
  // Closed forms of the classical Wendland functions.
  const RationalPolynomial p31 =
      RationalPolynomial{q(1, 20)} * one_minus_r_pow(4) * RationalPolynomial{q(1), q(4)};
  const RationalPolynomial p42 = RationalPolynomial{q(1, 1680)} * one_minus_r_pow(6) *
                                 RationalPolynomial{q(3), q(18), q(35)};
  const RationalPolynomial p53 = RationalPolynomial{q(1, 22176)} * one_minus_r_pow(8) *
                                 RationalPolynomial{q(1), q(8), q(25), q(32)};
  EXPECT_EQ(wendland_profile(2, 1), p31);
  EXPECT_EQ(wendland_profile(3, 1), p31);
  EXPECT_EQ(wendland_profile(2, 2), p42);
  EXPECT_EQ(wendland_profile(2, 3), p53);
  EXPECT_EQ(wendland_profile(2, 1)(q(0)), q(1, 20));
}

TEST(WendlandProfileTest, RecursionAgainstQuadrature) {
  // psi_{l,k+1}(r) = int_r^1 t psi_{l,k}(t) dt, checked with composite Simpson
  // on the float profile of the previous level.
  // l = 4 family: psi_{4,0} = (1-t)^4, psi_{4,1}, psi_{4,2}.
  auto psi40 = [](double t) { return std::pow(1.0 - t, 4); };
  auto integrate = [](auto f, double a, double b) {
    const int n = 2000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  auto psi41 = [&](double r) { return integrate([&](double t) { return t * psi40(t); }, r, 1.0); };
  const WendlandKernel k(2, 2);  // l = 4, k = 2
  for (double r : {0.0, 0.2, 0.45, 0.7, 0.95}) {
    const double expected = integrate([&](double t) { return t * psi41(t); }, r, 1.0);
    EXPECT_NEAR(k.profile_value(r), expected, 1e-12) << "r = " << r;
  }
}

TEST(WendlandKernelTest, ValuesAndSupport) {
  const WendlandKernel k(1, 1);
  Eigen::VectorXd x(1), y(1);
  x << 0.0;
  y << 0.5;
  const double exact = static_cast<double>(q(1, 12) - q(1, 8) + q(1, 12) - q(1, 64));
  EXPECT_NEAR(k(x, y), exact, 1e-16);
  EXPECT_DOUBLE_EQ(k(x, x), k.kappa_squared());
  EXPECT_DOUBLE_EQ(k.kappa_squared(), 1.0 / 12.0);
  y << 1.0;
  EXPECT_EQ(k(x, y), 0.0);
  y << 3.0;
  EXPECT_EQ(k(x, y), 0.0);
  const WendlandKernel wide = k.rescaled(0.25);
  EXPECT_DOUBLE_EQ(wide.support_radius(), 4.0);
  EXPECT_GT(wide(x, y), 0.0);
  EXPECT_DOUBLE_EQ(wide(x, y), k.profile_value(0.75));
}

TEST(WendlandKernelTest, RejectsBadParameters) {
  EXPECT_THROW(WendlandKernel(0, 1), UsageError);
  EXPECT_THROW(WendlandKernel(2, -1), UsageError);
  EXPECT_THROW(WendlandKernel(2, 1, 0.0), UsageError);
  const WendlandKernel k(2, 1);
  EXPECT_THROW(k.radial_derivatives(0.3, 2), SmoothnessError);
  EXPECT_THROW(k.second_quotient(), SmoothnessError);
  EXPECT_NO_THROW(k.radial_derivatives(0.3, 1));
}

TEST(WendlandKernelTest, OutsideSupportDerivativesVanish) {
  const WendlandKernel k(2, 2, 2.0);
  const RadialDerivatives rd = k.radial_derivatives(0.5);
  EXPECT_EQ(rd.psi, 0.0);
  EXPECT_EQ(rd.psi1, 0.0);
  EXPECT_EQ(rd.psi2, 0.0);
  const RadialDerivatives far = k.radial_derivatives(7.0);
  EXPECT_EQ(far.psi1, 0.0);
}

// Central differences of psi(c s) and psi1 against the analytic quotients.
class RadialDerivativeFd : public ::testing::TestWithParam<std::tuple<int, int, double>> {};

TEST_P(RadialDerivativeFd, MatchesFiniteDifferences) {
  const auto [d, kk, c] = GetParam();
  const WendlandKernel k(d, kk, c);
  const double support = 1.0 / c;
  int checked = 0;
  for (int i = 1; i <= 50; ++i) {
    const double s = support * (0.02 + 0.94 * (i - 1) / 49.0);
    const double h = 1e-5 * support;
    const RadialDerivatives rd = k.radial_derivatives(s);
    const double dpsi = (k.at_distance(s + h) - k.at_distance(s - h)) / (2 * h);
    EXPECT_NEAR(rd.psi1, dpsi / s, 1e-6 * std::max(std::abs(rd.psi1), 1e-3 * std::abs(k.kappa_squared() * c * c)))
        << "s = " << s;
    const double dpsi1 = (k.radial_derivatives(s + h).psi1 - k.radial_derivatives(s - h).psi1) / (2 * h);
    EXPECT_NEAR(rd.psi2, dpsi1 / s,
                1e-6 * std::max(std::abs(rd.psi2), 1e-3 * std::abs(k.kappa_squared() * std::pow(c, 4))))
        << "s = " << s;
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

INSTANTIATE_TEST_SUITE_P(Kernels, RadialDerivativeFd,
                         ::testing::Values(std::make_tuple(2, 2, 1.0), std::make_tuple(2, 3, 0.5),
                                           std::make_tuple(1, 2, 2.0), std::make_tuple(3, 2, 1.0)));

TEST(WendlandKernelTest, FirstQuotientNearOrigin) {
  // Near r = 0 the quotient psi'(r)/r matches a central difference of psi.
  const WendlandKernel k(2, 1);
  const double r = 1e-4, h = 1e-7;
  const double fd = (k.profile_value(r + h) - k.profile_value(r - h)) / (2 * h) / r;
  EXPECT_NEAR(k.radial_derivatives(r, 1).psi1, fd, 1e-6 * std::abs(fd));
  // For psi_{3,1}: psi'(r)/r = -(1-r)^3 exactly, so the limit at 0 is -1.
  EXPECT_DOUBLE_EQ(k.radial_derivatives(0.0, 1).psi1, -1.0);
  EXPECT_DOUBLE_EQ(k.radial_derivatives(r, 1).psi1, -std::pow(1.0 - r, 3));
}

TEST(WendlandKernelTest, FirstQuotientIsPreviousLevelNegated) {
  for (int kk = 1; kk <= 3; ++kk) {
    const WendlandKernel k(2, kk);
    const RationalPolynomial expected = -k.profile().derivative().divide_by_r();
    EXPECT_EQ(-k.first_quotient(), expected);
  }
}

TEST(WendlandKernelTest, GradientAntisymmetricAndMatchesFd) {
  const WendlandKernel k(2, 2, 0.8);
  Eigen::Vector2d x(0.3, -0.2), y(-0.1, 0.4);
  const Eigen::VectorXd gx = k.gradient(x, y);
  const Eigen::VectorXd gy = k.gradient(y, x);
  EXPECT_NEAR((gx + gy).norm(), 0.0, 1e-15);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(i) = h;
    const double fd = (k(x + e, y) - k(x - e, y)) / (2 * h);
    EXPECT_NEAR(gx(i), fd, 1e-7);
  }
  EXPECT_NEAR(k.gradient(x, x).norm(), 0.0, 0.0);
}

TEST(WendlandKernelTest, GramMatrixPositiveDefinite) {
  for (int d : {1, 2}) {
    for (int kk : {1, 2, 3}) {
      const WendlandKernel k(d, kk, 0.9);
      const int n = 12;
      Eigen::MatrixXd pts(n, d);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) pts(i, j) = std::sin(1.7 * i + 0.9 * j + 0.3 * i * j);
      Eigen::MatrixXd g(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = k(pts.row(i).transpose(), pts.row(j).transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(g);
      EXPECT_EQ(llt.info(), Eigen::Success) << "d=" << d << " k=" << kk;
    }
  }
}

}  // namespace
}  // namespace kernlyap
