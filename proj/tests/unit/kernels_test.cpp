#include "kernlyap/kernels.hpp"

#include <random>

#include <gtest/gtest.h>

namespace kernlyap {
namespace {

PointSet random_points(Eigen::Index n, int d, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  PointSet p(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) p(i, j) = u(rng);
  return p;
}

TEST(KernelsTest, NearestSiteCountsAgreeAndBreakTiesLow) {
  PointSet sites(2, 1);
  sites << 0.0, 1.0;
  PointSet samples(3, 1);
  samples << 0.5, 0.1, 0.9;  // 0.5 is a tie
  for (Execution e : {Execution::serial, Execution::parallel}) {
    const auto counts = kernels::nearest_site_counts(sites, samples, e);
    EXPECT_EQ(counts[0], 2);
    EXPECT_EQ(counts[1], 1);
  }
  const PointSet s = random_points(37, 2, 1);
  const PointSet x = random_points(5000, 2, 2);
  EXPECT_EQ(kernels::nearest_site_counts(s, x, Execution::serial),
            kernels::nearest_site_counts(s, x, Execution::parallel));
}

TEST(KernelsTest, MaxNearestDistance) {
  PointSet sites(1, 1);
  sites << 0.0;
  PointSet cand(3, 1);
  cand << -0.2, 0.5, 1.0;
  EXPECT_DOUBLE_EQ(kernels::max_nearest_distance(sites, cand, Execution::serial), 1.0);
  EXPECT_DOUBLE_EQ(kernels::max_nearest_distance(sites, cand, Execution::parallel), 1.0);
}

TEST(KernelsTest, GramMatrixMatchesPointwiseKernel) {
  const WendlandKernel k(2, 2, 0.7);
  const PointSet a = random_points(23, 2, 3);
  const PointSet b = random_points(17, 2, 4);
  const Eigen::MatrixXd g = kernels::gram_matrix(k, a, b, Execution::serial);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      EXPECT_DOUBLE_EQ(g(i, j), k(a.row(i).transpose(), b.row(j).transpose()));
  EXPECT_LE((g - kernels::gram_matrix(k, a, b, Execution::parallel)).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::MatrixXd sym = kernels::gram_matrix(k, a, a, Execution::parallel);
  EXPECT_EQ((sym - sym.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(KernelsTest, ExpansionValuesMatchDirectSum) {
  const WendlandKernel k(2, 1, 1.3);
  const PointSet centers = random_points(15, 2, 5);
  const Eigen::MatrixXd coeffs = random_points(15, 2, 6);
  const PointSet pts = random_points(40, 2, 7, 1.5);
  const Eigen::MatrixXd s = kernels::expansion_values(k, centers, coeffs, pts, Execution::serial);
  const Eigen::MatrixXd p = kernels::expansion_values(k, centers, coeffs, pts, Execution::parallel);
  for (Eigen::Index j = 0; j < pts.rows(); ++j) {
    Eigen::Vector2d direct = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      direct += coeffs.row(i).transpose() * k(pts.row(j).transpose(), centers.row(i).transpose());
    EXPECT_NEAR((s.row(j).transpose() - direct).norm(), 0.0, 1e-14);
  }
  EXPECT_LE((s - p).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(KernelsTest, OrbitalBlocksSerialMatchesParallel) {
  const WendlandKernel k(2, 2, 0.6);
  const PointSet q = random_points(60, 2, 8);
  const PointSet v = random_points(60, 2, 9);
  const PointSet p = random_points(9, 2, 10);
  const Eigen::MatrixXd bs = kernels::orbital_matrix(k, q, v, Execution::serial);
  const Eigen::MatrixXd bp = kernels::orbital_matrix(k, q, v, Execution::parallel);
  EXPECT_LE((bs - bp).cwiseAbs().maxCoeff(), 1e-13 * bs.cwiseAbs().maxCoeff());
  EXPECT_LE((bs - bs.transpose()).cwiseAbs().maxCoeff(), 1e-13 * bs.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd ds = kernels::orbital_point_matrix(k, q, v, p, Execution::serial);
  const Eigen::MatrixXd dp = kernels::orbital_point_matrix(k, q, v, p, Execution::parallel);
  EXPECT_LE((ds - dp).cwiseAbs().maxCoeff(), 1e-15);
  for (Eigen::Index i = 0; i < q.rows(); i += 7)
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const double expected = k.gradient(q.row(i).transpose(), p.row(j).transpose()).dot(v.row(i));
      EXPECT_NEAR(ds(i, j), expected, 1e-14);
    }
}

TEST(KernelsTest, OrbitalExpansionMatchesDirectFormula) {
  const WendlandKernel k(2, 2, 0.9);
  const PointSet q = random_points(12, 2, 11);
  const PointSet v = random_points(12, 2, 12);
  const PointSet p = random_points(4, 2, 13);
  const Eigen::VectorXd a = random_points(12, 1, 14).col(0);
  const Eigen::VectorXd b = random_points(4, 1, 15).col(0);
  const PointSet x = random_points(30, 2, 16);
  const auto s = kernels::orbital_expansion(k, q, v, a, p, b, x, Execution::serial);
  const auto par = kernels::orbital_expansion(k, q, v, a, p, b, x, Execution::parallel);
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    const Eigen::VectorXd xn = x.row(n).transpose();
    double value = 0.0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      // Functional applied in the second argument: <grad_y K(x, y), v_i> at y = q_i.
      value += a(i) * k.gradient(q.row(i).transpose(), xn).dot(v.row(i));
    }
    for (Eigen::Index j = 0; j < p.rows(); ++j) value += b(j) * k(xn, p.row(j).transpose());
    EXPECT_NEAR(s.value(n), value, 1e-13);
    // Gradient by central differences of the value.
    const double h = 1e-6;
    for (int c = 0; c < 2; ++c) {
      PointSet xp = x.row(n), xm = x.row(n);
      xp(0, c) += h;
      xm(0, c) -= h;
      const double fd = (kernels::orbital_expansion(k, q, v, a, p, b, xp).value(0) -
                         kernels::orbital_expansion(k, q, v, a, p, b, xm).value(0)) /
                        (2 * h);
      EXPECT_NEAR(s.gradient(n, c), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
  EXPECT_LE((s.value - par.value).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((s.gradient - par.gradient).cwiseAbs().maxCoeff(), 1e-14);
}

}  // namespace
}  // namespace kernlyap
