#include "kernlyap/testbed.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "kernlyap/errors.hpp"

namespace kernlyap::testbed {
namespace {

TEST(SystemsTest, ShippedSystemsAreStableWithValidDomains) {
  for (const auto& name : system_names()) {
    const ReferenceSystem sys = make_system(name);
    EXPECT_EQ(sys.name, name);
    EXPECT_TRUE(sys.is_exponentially_stable()) << name;
    EXPECT_NO_THROW(sys.domain.validate()) << name;
    EXPECT_EQ(sys.field(sys.xbar).norm(), 0.0) << name;
  }
  EXPECT_THROW(make_system("lorenz"), UsageError);
}

TEST(SystemsTest, NonlinearJacobianByFiniteDifferences) {
  const ReferenceSystem sys = make_system("nonlinear2d");
  const double h = 1e-6;
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(c) = h;
    const Eigen::VectorXd col = (sys.field(e) - sys.field(-e)) / (2 * h);
    EXPECT_NEAR((col - sys.jacobian.col(c)).norm(), 0.0, 1e-9);
  }
  EXPECT_FALSE(sys.linear_matrix.has_value());
}

TEST(GenerateDataTest, NoiseFreeIsExact) {
  const ReferenceSystem sys = make_system("linear2d");
  const PointSet sites = make_sites(sys.domain.ambient, 30, SiteLayout::random, 1);
  const SampleSet z = generate_data(sys, sites, {NoiseFamily::gaussian, 0.0, 2});
  for (Eigen::Index i = 0; i < sites.rows(); ++i)
    EXPECT_EQ(z.values.row(i), (*sys.linear_matrix * sites.row(i).transpose()).transpose());
}

TEST(GenerateDataTest, NoiseMomentsAtOneSite) {
  const ReferenceSystem sys = make_system("linear1d");
  const PointSet sites = PointSet::Constant(10000, 1, 0.4);
  for (NoiseFamily fam : {NoiseFamily::gaussian, NoiseFamily::uniform}) {
    const SampleSet z = generate_data(sys, sites, {fam, 0.1, 11});
    const Eigen::ArrayXd eta = z.values.col(0).array() + 0.4;
    const double mean = eta.mean();
    const double var = (eta - mean).square().sum() / (eta.size() - 1);
    EXPECT_NEAR(mean, 0.0, 0.01) << to_string(fam);
    EXPECT_NEAR(var, 0.01, 0.001) << to_string(fam);
    if (fam == NoiseFamily::uniform) EXPECT_LE(eta.abs().maxCoeff(), std::sqrt(3.0) * 0.1);
  }
}

TEST(GenerateDataTest, SameSeedSameBytes) {
  const ReferenceSystem sys = make_system("nonlinear2d");
  const PointSet sites = make_sites(sys.domain.ambient, 50, SiteLayout::halton, 3);
  const SampleSet a = generate_data(sys, sites, {NoiseFamily::gaussian, 0.05, 9});
  const SampleSet b = generate_data(sys, sites, {NoiseFamily::gaussian, 0.05, 9});
  EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), sizeof(double) * a.values.size()), 0);
  const SampleSet c = generate_data(sys, sites, {NoiseFamily::gaussian, 0.05, 10});
  EXPECT_NE(a.values, c.values);
  EXPECT_THROW(generate_data(sys, sites, {NoiseFamily::gaussian, -1.0, 9}), UsageError);
}

TEST(SitesTest, LayoutsStayInBox) {
  const Box box{Point::Constant(2, -1.5), Point::Constant(2, 1.5)};
  for (SiteLayout l : {SiteLayout::random, SiteLayout::halton, SiteLayout::grid}) {
    const PointSet s = make_sites(box, 400, l, 4);
    EXPECT_EQ(s.rows(), 400);
    for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_TRUE(box.contains(s.row(i).transpose()));
  }
  const PointSet g = make_sites(box, 4, SiteLayout::grid, 0);
  EXPECT_DOUBLE_EQ(g(0, 0), -0.75);
  EXPECT_DOUBLE_EQ(g(3, 1), 0.75);
  EXPECT_THROW(make_sites(box, 5, SiteLayout::grid, 0), UsageError);
  EXPECT_THROW(make_sites(box, 0, SiteLayout::random, 0), UsageError);
  EXPECT_THROW(site_layout_from_string("sobol"), UsageError);
}

TEST(QuadraticOracleTest, ClosedForms) {
  const Eigen::MatrixXd a1 = Eigen::MatrixXd::Constant(1, 1, -1.0);
  EXPECT_NEAR(oracle_V_quadratic(a1, Eigen::MatrixXd::Constant(1, 1, 2.0))(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(oracle_V_quadratic(a1, Eigen::MatrixXd::Constant(1, 1, 1.0))(0, 0), 0.5, 1e-15);
  const Eigen::MatrixXd p = oracle_V_quadratic(-Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LE((p - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_THROW(oracle_V_quadratic(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)),
               UsageError);
}

TEST(QuadraticOracleTest, SatisfiesLyapunovIdentity) {
  const ReferenceSystem sys = make_system("linear2d");
  const Eigen::MatrixXd& a = *sys.linear_matrix;
  Eigen::Matrix2d q;
  q << 2.0, 0.3, 0.3, 1.0;
  const Eigen::MatrixXd p = oracle_V_quadratic(a, q);
  EXPECT_LE((a.transpose() * p + p * a + q).cwiseAbs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    const Eigen::Vector2d x(u(rng), u(rng));
    // grad V = 2 P x.
    const double residual = (2.0 * p * x).dot(a * x) + x.dot(q * x);
    EXPECT_NEAR(residual, 0.0, 1e-12);
  }
}

TEST(Rk4Test, FourthOrderConvergence) {
  const ReferenceSystem sys = make_system("linear2d");
  const Eigen::Vector2d x0(0.8, -0.5);
  // Exact flow by the matrix exponential through the eigen-decomposition.
  const Eigen::MatrixXd a = *sys.linear_matrix;
  // A = [[-1, 2], [-3, -1]] has eigenvalues -1 +- i sqrt(6).
  const double t = 1.0, w = std::sqrt(6.0);
  Eigen::Matrix2d expat;
  const Eigen::Matrix2d b = a + Eigen::Matrix2d::Identity();  // b^2 = -6 I
  expat = std::exp(-t) * (std::cos(w * t) * Eigen::Matrix2d::Identity() + std::sin(w * t) / w * b);
  const Eigen::Vector2d exact = expat * x0;
  const double e1 = (rk4_flow(sys.field, x0, t, 0.02) - exact).norm();
  const double e2 = (rk4_flow(sys.field, x0, t, 0.01) - exact).norm();
  EXPECT_NEAR(e1 / e2, 16.0, 1.5);
  EXPECT_LT(e2, 1e-7);
  // Backward flow inverts forward flow.
  EXPECT_LE((rk4_flow(sys.field, rk4_flow(sys.field, x0, 0.7, 1e-3), -0.7, 1e-3) - x0).norm(), 1e-10);
}

TEST(VFlowOracleTest, DecayClosedForm) {
  const ReferenceSystem sys = make_system("linear1d");
  const PFunction p = PFunction::quadratic(Point::Zero(1));
  const OracleValue v = oracle_V_flow(sys, p, Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_NEAR(v.value, 0.5, 1e-9);
  EXPECT_LE(v.error_estimate, 1e-9);
  EXPECT_EQ(oracle_V_flow(sys, p, Eigen::VectorXd::Zero(1)).value, 0.0);
}

TEST(VFlowOracleTest, AgreesWithQuadraticOracle) {
  const ReferenceSystem sys = make_system("linear2d");
  const PFunction p = PFunction::quadratic(Point::Zero(2));
  const Eigen::MatrixXd pm = oracle_V_quadratic(*sys.linear_matrix, p.q);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    const Eigen::Vector2d x(u(rng), u(rng));
    EXPECT_NEAR(oracle_V_flow(sys, p, x).value, x.dot(pm * x), 1e-6);
  }
}

TEST(VFlowOracleTest, UnstableSystemRejected) {
  DomainSpec dom = make_system("linear1d").domain;
  const ReferenceSystem grow = linear_system("grow", Eigen::MatrixXd::Constant(1, 1, 1.0), dom);
  EXPECT_THROW(oracle_V_flow(grow, PFunction::quadratic(Point::Zero(1)), Eigen::VectorXd::Constant(1, 0.5)),
               NumericalError);
}

TEST(TFlowOracleTest, DecayExamples) {
  const ReferenceSystem sys = make_system("decay2d");
  const Sphere gamma{Point::Zero(2), 1.0};
  const ScalarFunction zero = [](const Eigen::VectorXd&) { return 0.0; };
  const CrossingResult outside = oracle_T_flow(sys, gamma, 1.0, zero, Eigen::Vector2d(std::exp(1.0), 0.0));
  EXPECT_NEAR(outside.theta, 1.0, 1e-8);
  EXPECT_NEAR(outside.value, 1.0, 1e-8);
  const CrossingResult inside = oracle_T_flow(sys, gamma, 1.0, zero, Eigen::Vector2d(0.3, 0.4));
  EXPECT_NEAR(inside.theta, std::log(0.5), 1e-8);
  EXPECT_NEAR(inside.value, std::log(0.5), 1e-8);
  const CrossingResult on = oracle_T_flow(sys, gamma, 2.0, [](const Eigen::VectorXd& y) { return y(0); },
                                          Eigen::Vector2d(0.0, 1.0));
  EXPECT_EQ(on.theta, 0.0);
  EXPECT_EQ(on.value, 0.0);
}

TEST(TFlowOracleTest, DecreasesTowardEquilibrium) {
  const ReferenceSystem sys = make_system("linear2d");
  const Sphere gamma{Point::Zero(2), 0.8};
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {1.0, 0.7, 0.4, 0.2, 0.05}) {
    const double v = oracle_T_flow(sys, gamma, 1.0, nullptr, Eigen::Vector2d(s, 0.5 * s)).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(TFlowOracleTest, OutwardFlowRejected) {
  const ReferenceSystem grow =
      linear_system("grow", Eigen::MatrixXd::Identity(2, 2), make_system("decay2d").domain);
  EXPECT_THROW(oracle_T_flow(grow, Sphere{Point::Zero(2), 1.0}, 1.0, nullptr, Eigen::Vector2d(0.5, 0.0)),
               NumericalError);
}

}  // namespace
}  // namespace kernlyap::testbed
