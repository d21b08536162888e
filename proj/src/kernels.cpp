#include "kernlyap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kernlyap::kernels {

namespace {

// ---------------------------------------------------------------------------
// Serial reference implementations. Written for clarity, one entry at a time.
// ---------------------------------------------------------------------------

std::vector<std::int64_t> nearest_site_counts_serial(const PointSet& sites,
                                                     const PointSet& samples) {
  std::vector<std::int64_t> counts(sites.rows(), 0);
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    Eigen::Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
      const double d2 = (sites.row(i) - samples.row(s)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    ++counts[best];
  }
  return counts;
}

double max_nearest_distance_serial(const PointSet& sites, const PointSet& candidates) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < candidates.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
      best = std::min(best, (sites.row(i) - candidates.row(j)).squaredNorm());
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

Eigen::MatrixXd gram_matrix_serial(const WendlandKernel& kernel, const PointSet& a,
                                   const PointSet& b) {
  Eigen::MatrixXd g(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      g(i, j) = kernel(a.row(i).transpose(), b.row(j).transpose());
  return g;
}

Eigen::MatrixXd expansion_values_serial(const WendlandKernel& kernel, const PointSet& centers,
                                        const Eigen::MatrixXd& coeffs, const PointSet& points) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), coeffs.cols());
  for (Eigen::Index j = 0; j < points.rows(); ++j)
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      out.row(j) += kernel(points.row(j).transpose(), centers.row(i).transpose()) * coeffs.row(i);
  return out;
}

Eigen::MatrixXd orbital_matrix_serial(const WendlandKernel& kernel, const PointSet& q,
                                      const PointSet& v) {
  const Eigen::Index m = q.rows();
  Eigen::MatrixXd b(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::VectorXd diff = (q.row(i) - q.row(j)).transpose();
      const RadialDerivatives rd = kernel.radial_derivatives(diff.norm(), 2);
      b(i, j) = -rd.psi2 * diff.dot(v.row(i).transpose()) * diff.dot(v.row(j).transpose()) -
                rd.psi1 * v.row(i).dot(v.row(j));
    }
  }
  return b;
}

Eigen::MatrixXd orbital_point_matrix_serial(const WendlandKernel& kernel, const PointSet& q,
                                            const PointSet& v, const PointSet& p) {
  Eigen::MatrixXd d(q.rows(), p.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const Eigen::VectorXd diff = (q.row(i) - p.row(j)).transpose();
      d(i, j) = kernel.radial_derivatives(diff.norm(), 1).psi1 * diff.dot(v.row(i).transpose());
    }
  }
  return d;
}

ExpansionField orbital_expansion_serial(const WendlandKernel& kernel, const PointSet& q,
                                        const PointSet& v, const Eigen::VectorXd& a,
                                        const PointSet& p, const Eigen::VectorXd& b,
                                        const PointSet& points) {
  const int order = std::min(kernel.smoothness(), 2);
  ExpansionField out{Eigen::VectorXd::Zero(points.rows()),
                     PointSet::Zero(points.rows(), points.cols())};
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const Eigen::VectorXd x = points.row(n).transpose();
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const Eigen::VectorXd diff = x - q.row(i).transpose();
      const Eigen::VectorXd vi = v.row(i).transpose();
      const RadialDerivatives rd = kernel.radial_derivatives(diff.norm(), order);
      out.value(n) += a(i) * (-rd.psi1 * diff.dot(vi));
      out.gradient.row(n) += (a(i) * (-rd.psi2 * diff.dot(vi) * diff - rd.psi1 * vi)).transpose();
    }
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const Eigen::VectorXd diff = x - p.row(j).transpose();
      const RadialDerivatives rd = kernel.radial_derivatives(diff.norm(), std::min(order, 1));
      out.value(n) += b(j) * rd.psi;
      out.gradient.row(n) += (b(j) * rd.psi1 * diff).transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// OpenMP implementations. Rows (or evaluation points) are independent, so
// each thread owns whole rows and results do not depend on thread count.
// ---------------------------------------------------------------------------

inline double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double dot(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

std::vector<std::int64_t> nearest_site_counts_omp(const PointSet& sites,
                                                  const PointSet& samples) {
  const int d = static_cast<int>(sites.cols());
  const Eigen::Index m = sites.rows();
  const Eigen::Index n = samples.rows();
  std::vector<Eigen::Index> owner(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index s = 0; s < n; ++s) {
    const double* y = samples.data() + s * d;
    Eigen::Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d2 = sq_dist(sites.data() + i * d, y, d);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    owner[s] = best;
  }
  std::vector<std::int64_t> counts(m, 0);
  for (Eigen::Index s = 0; s < n; ++s) ++counts[owner[s]];
  return counts;
}

double max_nearest_distance_omp(const PointSet& sites, const PointSet& candidates) {
  const int d = static_cast<int>(sites.cols());
  const Eigen::Index m = sites.rows();
  const Eigen::Index n = candidates.rows();
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* y = candidates.data() + j * d;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) best = std::min(best, sq_dist(sites.data() + i * d, y, d));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

Eigen::MatrixXd gram_matrix_omp(const WendlandKernel& kernel, const PointSet& a,
                                const PointSet& b) {
  const int d = static_cast<int>(a.cols());
  Eigen::MatrixXd g(a.rows(), b.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      g(i, j) = kernel.at_distance(std::sqrt(sq_dist(a.data() + i * d, b.data() + j * d, d)));
  return g;
}

Eigen::MatrixXd expansion_values_omp(const WendlandKernel& kernel, const PointSet& centers,
                                     const Eigen::MatrixXd& coeffs, const PointSet& points) {
  const int d = static_cast<int>(points.cols());
  const Eigen::Index q = coeffs.cols();
  const double support2 = kernel.support_radius() * kernel.support_radius();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), q);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const double* x = points.data() + j * d;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
      const double d2 = sq_dist(x, centers.data() + i * d, d);
      if (d2 >= support2) continue;
      const double k = kernel.at_distance(std::sqrt(d2));
      for (Eigen::Index c = 0; c < q; ++c) out(j, c) += k * coeffs(i, c);
    }
  }
  return out;
}

Eigen::MatrixXd orbital_matrix_omp(const WendlandKernel& kernel, const PointSet& q,
                                   const PointSet& v) {
  const int d = static_cast<int>(q.cols());
  const Eigen::Index m = q.rows();
  Eigen::MatrixXd b(m, m);
  std::vector<double> diff_buf;
#pragma omp parallel for schedule(dynamic, 8) private(diff_buf)
  for (Eigen::Index i = 0; i < m; ++i) {
    diff_buf.resize(d);
    const double* qi = q.data() + i * d;
    const double* vi = v.data() + i * d;
    for (Eigen::Index j = i; j < m; ++j) {
      const double* qj = q.data() + j * d;
      const double* vj = v.data() + j * d;
      for (int k = 0; k < d; ++k) diff_buf[k] = qi[k] - qj[k];
      const double r = std::sqrt(dot(diff_buf.data(), diff_buf.data(), d));
      const RadialDerivatives rd = kernel.radial_derivatives(r, 2);
      const double val = -rd.psi2 * dot(diff_buf.data(), vi, d) * dot(diff_buf.data(), vj, d) -
                         rd.psi1 * dot(vi, vj, d);
      b(i, j) = val;
      b(j, i) = val;
    }
  }
  return b;
}

Eigen::MatrixXd orbital_point_matrix_omp(const WendlandKernel& kernel, const PointSet& q,
                                         const PointSet& v, const PointSet& p) {
  const int d = static_cast<int>(q.cols());
  Eigen::MatrixXd out(q.rows(), p.rows());
  std::vector<double> diff_buf;
#pragma omp parallel for schedule(dynamic, 8) private(diff_buf)
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    diff_buf.resize(d);
    const double* qi = q.data() + i * d;
    const double* vi = v.data() + i * d;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const double* pj = p.data() + j * d;
      for (int k = 0; k < d; ++k) diff_buf[k] = qi[k] - pj[k];
      const double r = std::sqrt(dot(diff_buf.data(), diff_buf.data(), d));
      out(i, j) = kernel.radial_derivatives(r, 1).psi1 * dot(diff_buf.data(), vi, d);
    }
  }
  return out;
}

ExpansionField orbital_expansion_omp(const WendlandKernel& kernel, const PointSet& q,
                                     const PointSet& v, const Eigen::VectorXd& a,
                                     const PointSet& p, const Eigen::VectorXd& b,
                                     const PointSet& points) {
  const int d = static_cast<int>(points.cols());
  const int order = std::min(kernel.smoothness(), 2);
  const double support2 = kernel.support_radius() * kernel.support_radius();
  ExpansionField out{Eigen::VectorXd::Zero(points.rows()),
                     PointSet::Zero(points.rows(), points.cols())};
  std::vector<double> diff_buf;
#pragma omp parallel for schedule(dynamic, 16) private(diff_buf)
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    diff_buf.resize(d);
    const double* x = points.data() + n * d;
    double* grad = out.gradient.data() + n * d;
    double value = 0.0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const double* qi = q.data() + i * d;
      for (int k = 0; k < d; ++k) diff_buf[k] = x[k] - qi[k];
      const double r2 = dot(diff_buf.data(), diff_buf.data(), d);
      if (r2 >= support2) continue;
      const double* vi = v.data() + i * d;
      const RadialDerivatives rd = kernel.radial_derivatives(std::sqrt(r2), order);
      const double proj = dot(diff_buf.data(), vi, d);
      value += a(i) * (-rd.psi1 * proj);
      for (int k = 0; k < d; ++k) grad[k] += a(i) * (-rd.psi2 * proj * diff_buf[k] - rd.psi1 * vi[k]);
    }
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const double* pj = p.data() + j * d;
      for (int k = 0; k < d; ++k) diff_buf[k] = x[k] - pj[k];
      const double r2 = dot(diff_buf.data(), diff_buf.data(), d);
      if (r2 >= support2) continue;
      const RadialDerivatives rd = kernel.radial_derivatives(std::sqrt(r2), std::min(order, 1));
      value += b(j) * rd.psi;
      for (int k = 0; k < d; ++k) grad[k] += b(j) * rd.psi1 * diff_buf[k];
    }
    out.value(n) = value;
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> nearest_site_counts(const PointSet& sites, const PointSet& samples,
                                              Execution exec) {
  return exec == Execution::serial ? nearest_site_counts_serial(sites, samples)
                                   : nearest_site_counts_omp(sites, samples);
}

double max_nearest_distance(const PointSet& sites, const PointSet& candidates, Execution exec) {
  return exec == Execution::serial ? max_nearest_distance_serial(sites, candidates)
                                   : max_nearest_distance_omp(sites, candidates);
}

Eigen::MatrixXd gram_matrix(const WendlandKernel& kernel, const PointSet& a, const PointSet& b,
                            Execution exec) {
  return exec == Execution::serial ? gram_matrix_serial(kernel, a, b)
                                   : gram_matrix_omp(kernel, a, b);
}

Eigen::MatrixXd expansion_values(const WendlandKernel& kernel, const PointSet& centers,
                                 const Eigen::MatrixXd& coeffs, const PointSet& points,
                                 Execution exec) {
  return exec == Execution::serial ? expansion_values_serial(kernel, centers, coeffs, points)
                                   : expansion_values_omp(kernel, centers, coeffs, points);
}

Eigen::MatrixXd orbital_matrix(const WendlandKernel& kernel, const PointSet& q,
                               const PointSet& v, Execution exec) {
  return exec == Execution::serial ? orbital_matrix_serial(kernel, q, v)
                                   : orbital_matrix_omp(kernel, q, v);
}

Eigen::MatrixXd orbital_point_matrix(const WendlandKernel& kernel, const PointSet& q,
                                     const PointSet& v, const PointSet& p, Execution exec) {
  return exec == Execution::serial ? orbital_point_matrix_serial(kernel, q, v, p)
                                   : orbital_point_matrix_omp(kernel, q, v, p);
}

ExpansionField orbital_expansion(const WendlandKernel& kernel, const PointSet& q,
                                 const PointSet& v, const Eigen::VectorXd& orbital_coeffs,
                                 const PointSet& p, const Eigen::VectorXd& point_coeffs,
                                 const PointSet& points, Execution exec) {
  return exec == Execution::serial
             ? orbital_expansion_serial(kernel, q, v, orbital_coeffs, p, point_coeffs, points)
             : orbital_expansion_omp(kernel, q, v, orbital_coeffs, p, point_coeffs, points);
}

}  // namespace kernlyap::kernels
