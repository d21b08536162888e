#include "kernlyap/lyap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "kernlyap/errors.hpp"

namespace kernlyap {

// ---------------------------------------------------------------------------
// PFunction

PFunction PFunction::quadratic(const Point& xbar) {
  return PFunction{xbar, Eigen::MatrixXd::Identity(xbar.size(), xbar.size())};
}

PFunction PFunction::quadratic_form(const Point& xbar, const Eigen::MatrixXd& q) {
  PFunction p{xbar, q};
  p.validate();
  return p;
}

double PFunction::operator()(const PointRef& x) const {
  const Eigen::VectorXd y = x - xbar;
  return y.dot(q * y);
}

void PFunction::validate() const {
  if (q.rows() != xbar.size() || q.cols() != xbar.size()) {
    throw UsageError("p: matrix size must match the dimension of xbar");
  }
  if (!q.isApprox(q.transpose(), 1e-12)) throw UsageError("p: matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw UsageError("p: matrix must be positive definite");
}

// ---------------------------------------------------------------------------
// Collocation

ScreenResult screen_collocation(const PointSet& q, const PointSet& field_values) {
  if (q.rows() != field_values.rows() || q.cols() != field_values.cols()) {
    throw UsageError("collocation: one field value per point is required");
  }
  ScreenResult out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (field_values.row(i).norm() >= kMinFieldNorm) {
      keep.push_back(i);
    } else {
      out.dropped.push_back(i);
    }
  }
  out.kept.points.resize(static_cast<Eigen::Index>(keep.size()), q.cols());
  out.kept.field.resize(static_cast<Eigen::Index>(keep.size()), q.cols());
  for (std::size_t n = 0; n < keep.size(); ++n) {
    out.kept.points.row(n) = q.row(keep[n]);
    out.kept.field.row(n) = field_values.row(keep[n]);
  }
  return out;
}

ScreenResult screen_collocation(const PointSet& q, const VectorFieldModel& vf) {
  return screen_collocation(q, vf.evaluate(q));
}

ScreenResult screen_collocation(const PointSet& q, const VectorField& f) {
  PointSet values(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) values.row(i) = f(q.row(i).transpose()).transpose();
  return screen_collocation(q, values);
}

Collocation make_collocation(const PointSet& q, const PointSet& field_values) {
  ScreenResult s = screen_collocation(q, field_values);
  if (!s.dropped.empty()) {
    std::ostringstream os;
    os << "collocation: field norm below " << kMinFieldNorm << " at point indices";
    for (auto i : s.dropped) os << ' ' << i;
    throw NumericalError(os.str());
  }
  require_distinct(q, "collocation points");
  return std::move(s.kept);
}

Eigen::MatrixXd assemble_B(const Collocation& c, const WendlandKernel& kernel) {
  if (kernel.smoothness() < 2) {
    throw SmoothnessError("orbital collocation needs a kernel with smoothness index k >= 2");
  }
  if (c.points.cols() != kernel.dimension()) {
    throw UsageError("collocation: kernel dimension differs from point dimension");
  }
  return kernels::orbital_matrix(kernel, c.points, c.field);
}

Eigen::MatrixXd assemble_B(const PointSet& q, const VectorFieldModel& vf,
                           const WendlandKernel& kernel) {
  return assemble_B(make_collocation(q, vf.evaluate(q)), kernel);
}

// ---------------------------------------------------------------------------
// Model

LyapunovModel::LyapunovModel(LyapunovMode mode, WendlandKernel kernel, Collocation collocation,
                             PointSet gamma_points, Eigen::VectorXd coeffs, Eigen::VectorXd rhs)
    : mode_(mode),
      kernel_(std::move(kernel)),
      collocation_(std::move(collocation)),
      gamma_points_(std::move(gamma_points)),
      coeffs_(std::move(coeffs)),
      rhs_(std::move(rhs)) {
  if (gamma_points_.size() == 0) gamma_points_.resize(0, kernel_.dimension());
  if (coeffs_.size() != collocation_.size() + gamma_points_.rows()) {
    throw UsageError("Lyapunov model: coefficient count must equal M + N");
  }
}

kernels::ExpansionField LyapunovModel::evaluate(const PointSet& points, Execution exec) const {
  return kernels::orbital_expansion(kernel_, collocation_.points, collocation_.field,
                                    orbital_coeffs(), gamma_points_, point_coeffs(), points, exec);
}

double LyapunovModel::operator()(const Eigen::VectorXd& x) const {
  PointSet p(1, x.size());
  p.row(0) = x.transpose();
  return evaluate(p, Execution::serial).value(0);
}

Eigen::VectorXd LyapunovModel::gradient(const Eigen::VectorXd& x) const {
  PointSet p(1, x.size());
  p.row(0) = x.transpose();
  return evaluate(p, Execution::serial).gradient.row(0).transpose();
}

double orbital_derivative(const LyapunovModel& model, const VectorField& field,
                          const Eigen::VectorXd& x) {
  return model.gradient(x).dot(field(x));
}

Eigen::VectorXd orbital_derivative(const LyapunovModel& model, const PointSet& points,
                                   const PointSet& field_values) {
  const kernels::ExpansionField e = model.evaluate(points);
  return e.gradient.cwiseProduct(field_values).rowwise().sum();
}

double collocation_residual(const LyapunovModel& model) {
  const Eigen::Index m = model.collocation().size();
  double worst = 0.0;
  if (m > 0) {
    const Eigen::VectorXd lhs =
        orbital_derivative(model, model.collocation().points, model.collocation().field);
    worst = (lhs - model.rhs().head(m)).cwiseAbs().maxCoeff();
  }
  if (model.gamma_points().rows() > 0) {
    const Eigen::VectorXd vals = model.evaluate(model.gamma_points()).value;
    worst = std::max(worst, (vals - model.rhs().tail(vals.size())).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

struct SpdSolution {
  Eigen::VectorXd x;
  LyapunovProvenance provenance;
};

double eigen_condition(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

SpdSolution solve_spd(Eigen::MatrixXd a, const Eigen::VectorXd& b) {
  SpdSolution out;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * a.trace() / static_cast<double>(a.rows());
    a.diagonal().array() += jitter;
    llt.compute(a);
    out.provenance.jitter_applied = true;
    out.provenance.jitter = jitter;
    if (llt.info() != Eigen::Success) {
      throw FactorizationError(
          "collocation matrix is not numerically positive definite even after jitter; "
          "use coarser collocation points or a larger kernel support",
          eigen_condition(a));
    }
  }
  out.provenance.condition_estimate = 1.0 / llt.rcond();
  out.x = llt.solve(b);
  return out;
}

}  // namespace

LyapunovModel fit_V(const Collocation& c, const WendlandKernel& kernel, const PFunction& p) {
  if (c.size() < 1) throw UsageError("fit_V: need at least one collocation point");
  p.validate();
  const Eigen::MatrixXd b = assemble_B(c, kernel);
  Eigen::VectorXd rhs(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) rhs(i) = -p(c.points.row(i).transpose());
  SpdSolution sol = solve_spd(b, rhs);
  LyapunovModel model(LyapunovMode::V, kernel, c, PointSet(0, kernel.dimension()),
                      std::move(sol.x), std::move(rhs));
  model.pfun = p;
  model.provenance = sol.provenance;
  model.provenance.max_collocation_residual = collocation_residual(model);
  return model;
}

LyapunovModel fit_V(const PointSet& q, const VectorFieldModel& vf, const WendlandKernel& kernel,
                    const PFunction& p) {
  return fit_V(make_collocation(q, vf.evaluate(q)), kernel, p);
}

LyapunovModel fit_T(const Collocation& c, const PointSet& gamma_points,
                    const WendlandKernel& kernel, double cbar, const ScalarFunction& xi_t) {
  const Eigen::Index m = c.size();
  const Eigen::Index n = gamma_points.rows();
  if (m < 1) throw UsageError("fit_T: need at least one orbital collocation point (M >= 1)");
  if (n < 1) throw UsageError("fit_T: need at least one point on Gamma (N >= 1)");
  if (!(cbar > 0.0)) throw UsageError("fit_T: cbar must be positive");
  if (gamma_points.cols() != kernel.dimension()) {
    throw UsageError("fit_T: Gamma point dimension differs from kernel dimension");
  }
  PointSet all(m + n, kernel.dimension());
  all << c.points, gamma_points;
  require_distinct(all, "collocation/Gamma points");

  Eigen::MatrixXd sys(m + n, m + n);
  sys.topLeftCorner(m, m) = assemble_B(c, kernel);
  const Eigen::MatrixXd d = kernels::orbital_point_matrix(kernel, c.points, c.field, gamma_points);
  sys.topRightCorner(m, n) = d;
  sys.bottomLeftCorner(n, m) = d.transpose();
  sys.bottomRightCorner(n, n) = kernels::gram_matrix(kernel, gamma_points, gamma_points);

  Eigen::VectorXd rhs(m + n);
  rhs.head(m).setConstant(-cbar);
  Eigen::VectorXd xi(n);
  for (Eigen::Index j = 0; j < n; ++j) xi(j) = xi_t ? xi_t(gamma_points.row(j).transpose()) : 0.0;
  rhs.tail(n) = xi;

  SpdSolution sol = solve_spd(std::move(sys), rhs);
  LyapunovModel model(LyapunovMode::T, kernel, c, gamma_points, std::move(sol.x), std::move(rhs));
  model.cbar = cbar;
  model.xi_values = std::move(xi);
  model.provenance = sol.provenance;
  model.provenance.max_collocation_residual = collocation_residual(model);
  return model;
}

LyapunovModel fit_T(const PointSet& q, const PointSet& gamma_points, const VectorFieldModel& vf,
                    const WendlandKernel& kernel, double cbar, const ScalarFunction& xi_t) {
  return fit_T(make_collocation(q, vf.evaluate(q)), gamma_points, kernel, cbar, xi_t);
}

std::string to_string(LyapunovMode mode) { return mode == LyapunovMode::V ? "V" : "T"; }

LyapunovMode lyapunov_mode_from_string(const std::string& name) {
  if (name == "V" || name == "v") return LyapunovMode::V;
  if (name == "T" || name == "t") return LyapunovMode::T;
  throw UsageError("unknown Lyapunov mode '" + name + "' (expected V or T)");
}

}  // namespace kernlyap
