#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kernlyap/geometry.hpp"
#include "kernlyap/kernels.hpp"
#include "kernlyap/types.hpp"
#include "kernlyap/vfield.hpp"
#include "kernlyap/wendland.hpp"

namespace kernlyap {

/// Field values below this norm make the orbital-derivative functional
/// (nearly) vanish and are screened out of the collocation set.
inline constexpr double kMinFieldNorm = 1e-8;

/// p(x) = (x - xbar)^T Q (x - xbar), Q symmetric positive definite.
/// The default Q = I gives p(x) = ||x - xbar||^2.
struct PFunction {
  Point xbar;
  Eigen::MatrixXd q;

  static PFunction quadratic(const Point& xbar);
  static PFunction quadratic_form(const Point& xbar, const Eigen::MatrixXd& q);

  double operator()(const PointRef& x) const;
  /// Throws UsageError unless Q is symmetric positive definite.
  void validate() const;
};

/// Scalar boundary data on Gamma.
using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Orbital-derivative functionals u -> <grad u(q_i), v_i> with v_i = f(q_i).
struct Collocation {
  PointSet points;
  PointSet field;

  Eigen::Index size() const { return points.rows(); }
};

struct ScreenResult {
  Collocation kept;
  std::vector<Eigen::Index> dropped;
};

/// Evaluates the field at q and drops points with ||f(q)|| < kMinFieldNorm.
ScreenResult screen_collocation(const PointSet& q, const PointSet& field_values);
ScreenResult screen_collocation(const PointSet& q, const VectorFieldModel& vf);
ScreenResult screen_collocation(const PointSet& q, const VectorField& f);

/// Builds the collocation set and rejects (rather than drops) small-field
/// points, listing their indices. Throws NumericalError / DuplicateSiteError.
Collocation make_collocation(const PointSet& q, const PointSet& field_values);

/// (B)_{ij} = lambda^{i,x} lambda^{j,y} K(x,y). Requires k >= 2.
Eigen::MatrixXd assemble_B(const Collocation& c, const WendlandKernel& kernel);
Eigen::MatrixXd assemble_B(const PointSet& q, const VectorFieldModel& vf,
                           const WendlandKernel& kernel);

enum class LyapunovMode { V, T };

struct LyapunovProvenance {
  bool jitter_applied = false;
  double jitter = 0.0;
  double condition_estimate = 0.0;
  /// max_i |L s(q_i) - beta_i| over all interpolation conditions.
  double max_collocation_residual = 0.0;
};

/// Generalized interpolant
///   s(x) = sum_{i<=M} c_i lambda^{i,y} K(x,y) + sum_{j<=N} c_{M+j} K(x, gamma_j)
/// (N = 0 in V mode).
class LyapunovModel {
 public:
  LyapunovModel(LyapunovMode mode, WendlandKernel kernel, Collocation collocation,
                PointSet gamma_points, Eigen::VectorXd coeffs, Eigen::VectorXd rhs);

  LyapunovMode mode() const noexcept { return mode_; }
  const WendlandKernel& kernel() const noexcept { return kernel_; }
  const Collocation& collocation() const noexcept { return collocation_; }
  const PointSet& gamma_points() const noexcept { return gamma_points_; }
  /// All M + N coefficients.
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  Eigen::VectorXd orbital_coeffs() const { return coeffs_.head(collocation_.size()); }
  Eigen::VectorXd point_coeffs() const { return coeffs_.tail(gamma_points_.rows()); }
  const Eigen::VectorXd& rhs() const noexcept { return rhs_; }

  // Mode-specific metadata, serialized with the model.
  PFunction pfun;
  double cbar = 0.0;
  /// xi_T at the Gamma points.
  Eigen::VectorXd xi_values;
  LyapunovProvenance provenance;

  double operator()(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  kernels::ExpansionField evaluate(const PointSet& points,
                                   Execution exec = Execution::parallel) const;

 private:
  LyapunovMode mode_;
  WendlandKernel kernel_;
  Collocation collocation_;
  PointSet gamma_points_;
  Eigen::VectorXd coeffs_;
  Eigen::VectorXd rhs_;
};

/// Algorithm for V: solves B b = -(p(q_i))_i. Throws FactorizationError if
/// Cholesky fails even after one jitter retry.
LyapunovModel fit_V(const Collocation& c, const WendlandKernel& kernel, const PFunction& p);
LyapunovModel fit_V(const PointSet& q, const VectorFieldModel& vf, const WendlandKernel& kernel,
                    const PFunction& p);

/// Algorithm for T: solves [[C, D], [D^T, C0]] c = beta with beta_i = -cbar
/// on the orbital block and xi_T(gamma_j) on Gamma. Requires M >= 1 and N >= 1.
LyapunovModel fit_T(const Collocation& c, const PointSet& gamma_points,
                    const WendlandKernel& kernel, double cbar, const ScalarFunction& xi_t);
LyapunovModel fit_T(const PointSet& q, const PointSet& gamma_points, const VectorFieldModel& vf,
                    const WendlandKernel& kernel, double cbar, const ScalarFunction& xi_t);

inline double eval_lyap(const LyapunovModel& model, const Eigen::VectorXd& x) { return model(x); }

/// <grad s(x), field(x)>.
double orbital_derivative(const LyapunovModel& model, const VectorField& field,
                          const Eigen::VectorXd& x);
/// Batched form with precomputed field values, one per row.
Eigen::VectorXd orbital_derivative(const LyapunovModel& model, const PointSet& points,
                                   const PointSet& field_values);

/// Max violation of the interpolation conditions, evaluated through the
/// expansion (independent of the linear solve).
double collocation_residual(const LyapunovModel& model);

std::string to_string(LyapunovMode mode);
LyapunovMode lyapunov_mode_from_string(const std::string& name);

}  // namespace kernlyap
