#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "kernlyap/types.hpp"

namespace kernlyap {

/// Axis-aligned box [lower, upper].
struct Box {
  Point lower;
  Point upper;

  int dimension() const { return static_cast<int>(lower.size()); }
  double volume() const;
  double diameter() const;
  bool contains(const PointRef& x, double tol = 1e-12) const;
  /// All 2^d corners, one per row.
  PointSet corners() const;
};

/// Closed Euclidean ball.
struct Ball {
  Point center;
  double radius = 0.0;

  int dimension() const { return static_cast<int>(center.size()); }
  double diameter() const { return 2.0 * radius; }
  bool contains(const PointRef& x, double tol = 1e-12) const;
};

using Region = std::variant<Box, Ball>;

int region_dimension(const Region& region);
double region_diameter(const Region& region);
bool region_contains(const Region& region, const PointRef& x, double tol = 1e-12);
/// Smallest box containing the region.
Box bounding_box(const Region& region);

/// Sphere Gamma = {x : h(x) = 0}, h(x) = ||x - center||^2 - radius^2.
struct Sphere {
  Point center;
  double radius = 0.0;

  int dimension() const { return static_cast<int>(center.size()); }
  double level(const PointRef& x) const { return (x - center).squaredNorm() - radius * radius; }
  Point level_gradient(const PointRef& x) const { return 2.0 * (x - center); }
  /// Radial projection onto the sphere (x must differ from the center).
  Point project(const PointRef& x) const;
};

/// Domain description shared by the Lyapunov stage and verification:
/// ambient box X, compact Omega within X, equilibrium estimate xbar and the
/// excluded ball B_eps(xbar). D := Omega \ B_eps(xbar). Without an xbar
/// estimate (allowed for T) nothing is excluded and D = Omega.
struct DomainSpec {
  Box ambient;
  Region omega;
  std::optional<Point> xbar;
  double eps = 0.0;
  std::optional<Sphere> gamma;

  int dimension() const { return ambient.dimension(); }
  std::optional<Ball> excluded_ball() const;
  bool in_D(const PointRef& x) const;
  /// Checks dimensions, Omega within X, eps > 0, Gamma inside Omega and
  /// outside B_eps. Throws UsageError.
  void validate() const;
};

/// Throws DuplicateSiteError if two rows are closer than kDuplicateTolerance.
void require_distinct(const PointSet& points, const char* what = "sites");

/// Scrambled Halton points in the unit cube: deterministic given the seed.
/// Uses a seeded Cranley-Patterson rotation of the radical-inverse sequence.
PointSet halton_points(int dimension, std::int64_t count, std::uint64_t seed);

/// Voronoi cell volumes w_i = vol(X) * (fraction of quasi-random samples whose
/// nearest site is x_i). Ties go to the lowest index. Sum equals vol(X) up to
/// rounding. Throws DuplicateSiteError for coincident sites, UsageError for
/// sites outside X or n_mc < 10 m.
Eigen::VectorXd voronoi_weights(const PointSet& sites, const Box& ambient, std::int64_t n_mc,
                                std::uint64_t seed);

struct FillDistance {
  double value = 0.0;
  /// Spacing of the candidate grid used for the maximization.
  double candidate_spacing = 0.0;
};

/// Lower bound for h = max_{y in C} min_i ||x_i - y|| over a regular grid of
/// about n_candidates points in C plus C's extreme points.
FillDistance fill_distance(const PointSet& sites, const Region& region,
                           std::int64_t n_candidates = 40000);

/// Regular grid with the given spacing intersected with the region. Boxes
/// are anchored at their lower corner, balls at their center. Points within
/// the optional exclusion ball (open) are dropped. Throws UsageError when
/// nothing survives.
PointSet make_grid(const Region& region, double spacing,
                   const std::optional<Ball>& exclusion = std::nullopt);

/// n points on a sphere: uniform angles from angle 0 in d = 2, the two
/// endpoints in d = 1, a Fibonacci lattice in d = 3.
PointSet sphere_points(const Sphere& sphere, int n);

/// Candidate grid used by fill_distance (exposed for tests and benchmarks).
PointSet fill_distance_candidates(const Region& region, std::int64_t n_candidates,
                                  double* spacing_out = nullptr);

}  // namespace kernlyap
