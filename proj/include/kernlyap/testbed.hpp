#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kernlyap/geometry.hpp"
#include "kernlyap/lyap.hpp"
#include "kernlyap/vfield.hpp"

namespace kernlyap::testbed {

/// A known system x' = f(x) with an exponentially stable equilibrium.
struct ReferenceSystem {
  std::string name;
  int dimension = 0;
  VectorField field;
  Point xbar;
  Eigen::MatrixXd jacobian;
  /// Set for linear systems x' = A (x - xbar).
  std::optional<Eigen::MatrixXd> linear_matrix;
  /// Default domain for data generation and collocation.
  DomainSpec domain;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return field(x); }
  /// All Jacobian eigenvalues have negative real part.
  bool is_exponentially_stable() const;
};

/// x' = A x.
ReferenceSystem linear_system(std::string name, const Eigen::MatrixXd& a, DomainSpec domain);

/// Shipped systems: linear1d, linear2d, nonlinear2d, decay2d.
ReferenceSystem make_system(const std::string& name);
std::vector<std::string> system_names();

enum class NoiseFamily { gaussian, uniform };
std::string to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

struct NoiseModel {
  NoiseFamily family = NoiseFamily::gaussian;
  /// Per-component standard deviation.
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// y_i = f*(x_i) + eta_i with independent zero-mean draws per component.
/// The returned set has no design weights attached yet.
SampleSet generate_data(const ReferenceSystem& sys, const PointSet& sites, const NoiseModel& noise);

enum class SiteLayout { random, halton, grid };
std::string to_string(SiteLayout layout);
SiteLayout site_layout_from_string(const std::string& name);

/// m sites in the box: uniform random, scrambled Halton, or the densest
/// regular grid with at most m points per box (m must be a perfect d-th
/// power for grid).
PointSet make_sites(const Box& box, std::int64_t m, SiteLayout layout, std::uint64_t seed);

/// P solving A^T P + P A = -Q (vectorized Kronecker system). Throws
/// UsageError when A is not Hurwitz.
Eigen::MatrixXd oracle_V_quadratic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// One classical RK4 step.
Eigen::VectorXd rk4_step(const VectorField& f, const Eigen::VectorXd& x, double h);

/// Flow phi(t, x0) by fixed-step RK4 (last step shortened to land on t).
Eigen::VectorXd rk4_flow(const VectorField& f, const Eigen::VectorXd& x0, double t, double h);

struct FlowOptions {
  double step = 1e-3;
  double t_max = 200.0;
  /// Integration stops once ||x - xbar|| drops below this.
  double tail_radius = 1e-5;
  /// Divergence guard.
  double blowup_radius = 1e6;
  double crossing_tolerance = 1e-10;
};

struct OracleValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// V(x) = int_0^inf p(phi(t, x)) dt by RK4 on the augmented system plus a
/// tail bound from the Jacobian's decay rate. Throws NumericalError when the
/// trajectory does not contract within t_max.
OracleValue oracle_V_flow(const ReferenceSystem& sys, const PFunction& p, const Eigen::VectorXd& x,
                          const FlowOptions& options = {});

struct CrossingResult {
  double value = 0.0;
  /// Signed time to reach Gamma (negative when x lies inside Gamma).
  double theta = 0.0;
  Point hit;
};

/// T(x) = xi_T(phi(theta(x), x)) + cbar theta(x), theta by integrating
/// forward (outside Gamma) or backward (inside) to the crossing, refined by
/// bisection. Throws NumericalError when no crossing is found or the flow
/// does not cross Gamma inward at the hit point.
CrossingResult oracle_T_flow(const ReferenceSystem& sys, const Sphere& gamma, double cbar,
                             const ScalarFunction& xi_t, const Eigen::VectorXd& x,
                             const FlowOptions& options = {});

}  // namespace kernlyap::testbed
