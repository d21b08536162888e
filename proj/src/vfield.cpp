#include "kernlyap/vfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "kernlyap/errors.hpp"
#include "kernlyap/kernels.hpp"

namespace kernlyap {

namespace {

constexpr double kMinReciprocalCondition = 1e-15;
constexpr double kNormalResidualTolerance = 1e-10;

std::string solver_hint() {
  return "; try a larger lambda or a smaller kernel support radius";
}

}  // namespace

void attach_design(SampleSet& z, const Box& ambient, const DesignOptions& options) {
  const std::int64_t n_mc =
      std::max(options.min_mc_samples, options.mc_samples_per_site * z.size());
  z.weights = voronoi_weights(z.sites, ambient, n_mc, options.seed);
  z.fill_distance = fill_distance(z.sites, Region{ambient}, options.fill_candidates).value;
}

double choose_lambda(double w_norm, double h_x, double r, double delta) {
  if (!(r > 0.5 && r <= 1.0)) throw UsageError("choose_lambda: r must lie in (1/2, 1]");
  if (!(w_norm > 0.0) || !(h_x > 0.0)) {
    throw UsageError("choose_lambda: weight norm and fill distance must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("choose_lambda: delta must lie in (0, 1)");
  const double base = std::max(w_norm, std::pow(h_x, 2.0 / (3.0 - 2.0 * r)));
  return std::pow(base, 2.0 / (2.0 * r + 1.0));
}

std::string to_string(SolveForm form) {
  return form == SolveForm::weighted_lu ? "weighted_lu" : "normal_cholesky";
}

SolveForm solve_form_from_string(const std::string& name) {
  if (name == "weighted_lu") return SolveForm::weighted_lu;
  if (name == "normal_cholesky") return SolveForm::normal_cholesky;
  throw UsageError("unknown solver '" + name + "' (expected weighted_lu or normal_cholesky)");
}

VectorFieldModel::VectorFieldModel(WendlandKernel kernel, PointSet centers, Eigen::MatrixXd coeffs,
                                   double lambda, FitProvenance provenance)
    : kernel_(std::move(kernel)),
      centers_(std::move(centers)),
      coeffs_(std::move(coeffs)),
      lambda_(lambda),
      provenance_(std::move(provenance)) {
  if (centers_.cols() != kernel_.dimension() || coeffs_.rows() != centers_.rows() ||
      coeffs_.cols() != kernel_.dimension()) {
    throw UsageError("vector field model: inconsistent centers/coefficients/kernel dimensions");
  }
}

Eigen::VectorXd VectorFieldModel::operator()(const Eigen::VectorXd& x) const {
  PointSet p(1, x.size());
  p.row(0) = x.transpose();
  return evaluate(p, Execution::serial).row(0).transpose();
}

PointSet VectorFieldModel::evaluate(const PointSet& points, Execution exec) const {
  return kernels::expansion_values(kernel_, centers_, coeffs_, points, exec);
}

VectorField VectorFieldModel::as_field() const {
  return [model = *this](const Eigen::VectorXd& x) { return model(x); };
}

VectorFieldModel fit_vector_field(const SampleSet& z, const WendlandKernel& kernel, double lambda,
                                  const FitOptions& options) {
  const Eigen::Index m = z.size();
  if (m < 1) throw UsageError("fit_vector_field: empty sample set");
  if (z.values.rows() != m || z.values.cols() != z.sites.cols()) {
    throw UsageError("fit_vector_field: need one d-dimensional value per site");
  }
  if (kernel.dimension() != z.dimension()) {
    throw UsageError("fit_vector_field: kernel dimension differs from data dimension");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw UsageError("fit_vector_field: lambda must be positive");
  }
  if (z.weights.size() != m) throw UsageError("fit_vector_field: missing Voronoi weights");
  require_distinct(z.sites);

  const Eigen::MatrixXd a = kernels::gram_matrix(kernel, z.sites, z.sites);
  const Eigen::VectorXd& w = z.weights;
  const Eigen::MatrixXd dy = w.asDiagonal() * Eigen::MatrixXd(z.values);
  const Eigen::MatrixXd normal_rhs = a * dy;

  FitProvenance prov;
  prov.w_norm = z.weight_norm();
  prov.h_x = z.fill_distance;
  prov.r = options.r;
  prov.delta = options.delta;
  prov.seed = options.seed;
  prov.solver = options.solver;
  prov.dataset_hash = dataset_hash(z);

  Eigen::MatrixXd coeffs;
  double rcond = 0.0;
  if (options.solver == SolveForm::weighted_lu) {
    Eigen::MatrixXd sys = w.asDiagonal() * a;
    sys.diagonal().array() += lambda;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
    rcond = lu.rcond();
    if (!(rcond >= kMinReciprocalCondition)) {
      throw FactorizationError("fit_vector_field: (D_w A + lambda I) is numerically singular" +
                                   solver_hint(),
                               rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    coeffs = lu.solve(dy);
  } else {
    Eigen::MatrixXd sys = a * w.asDiagonal() * a + lambda * a;
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (!(rcond >= kMinReciprocalCondition)) {
      throw FactorizationError("fit_vector_field: normal-equation matrix is not numerically "
                               "positive definite" + solver_hint(),
                               rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    coeffs = llt.solve(normal_rhs);
  }
  prov.condition_estimate = 1.0 / rcond;

  // Residual in the normal-equation form, whatever form was solved.
  const Eigen::MatrixXd lhs = a * (w.asDiagonal() * (a * coeffs)) + lambda * (a * coeffs);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < coeffs.cols(); ++k) {
    const double scale = normal_rhs.col(k).norm();
    const double res = (lhs.col(k) - normal_rhs.col(k)).norm();
    worst = std::max(worst, scale > 0.0 ? res / scale : res);
  }
  prov.normal_residual = worst;
  if (!(worst <= kNormalResidualTolerance) && normal_rhs.norm() > 0.0) {
    throw FactorizationError("fit_vector_field: normal-equation residual " + std::to_string(worst) +
                                 " exceeds tolerance" + solver_hint(),
                             prov.condition_estimate);
  }
  return VectorFieldModel(kernel, z.sites, std::move(coeffs), lambda, std::move(prov));
}

VectorFieldModel fit_noise_free(const SampleSet& z, const VectorField& fstar,
                                const WendlandKernel& kernel, double lambda,
                                const FitOptions& options) {
  SampleSet clean = z;
  clean.sigma = 0.0;
  clean.values.resize(z.sites.rows(), z.sites.cols());
  for (Eigen::Index i = 0; i < z.sites.rows(); ++i) {
    clean.values.row(i) = fstar(z.sites.row(i).transpose()).transpose();
  }
  return fit_vector_field(clean, kernel, lambda, options);
}

double regularized_objective(const VectorFieldModel& model, const SampleSet& z) {
  const PointSet fitted = model.evaluate(z.sites);
  double data = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    data += z.weights(i) * (fitted.row(i) - z.values.row(i)).squaredNorm();
  }
  const Eigen::MatrixXd a = kernels::gram_matrix(model.kernel(), model.centers(), model.centers());
  const double norm2 = (model.coeffs().transpose() * a * model.coeffs()).trace();
  return data + model.lambda() * norm2;
}

std::string dataset_hash(const SampleSet& z) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const double* data, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(z.sites.data(), z.sites.size());
  mix(z.values.data(), z.values.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kernlyap
