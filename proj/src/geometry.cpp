#include "kernlyap/geometry.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kernlyap/errors.hpp"
#include "kernlyap/kernels.hpp"

namespace kernlyap {

double Box::volume() const { return (upper - lower).prod(); }

double Box::diameter() const { return (upper - lower).norm(); }

bool Box::contains(const PointRef& x, double tol) const {
  return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
}

PointSet Box::corners() const {
  const int d = dimension();
  PointSet out(Eigen::Index{1} << d, d);
  for (Eigen::Index c = 0; c < out.rows(); ++c)
    for (int k = 0; k < d; ++k) out(c, k) = ((c >> k) & 1) ? upper(k) : lower(k);
  return out;
}

bool Ball::contains(const PointRef& x, double tol) const {
  return (x - center).norm() <= radius + tol;
}

int region_dimension(const Region& region) {
  return std::visit([](const auto& r) { return r.dimension(); }, region);
}

double region_diameter(const Region& region) {
  return std::visit([](const auto& r) { return r.diameter(); }, region);
}

bool region_contains(const Region& region, const PointRef& x, double tol) {
  return std::visit([&](const auto& r) { return r.contains(x, tol); }, region);
}

Box bounding_box(const Region& region) {
  if (const auto* box = std::get_if<Box>(&region)) return *box;
  const auto& ball = std::get<Ball>(region);
  const Point r = Point::Constant(ball.dimension(), ball.radius);
  return Box{ball.center - r, ball.center + r};
}

Point Sphere::project(const PointRef& x) const {
  const Point dir = x - center;
  const double n = dir.norm();
  if (n == 0.0) throw UsageError("cannot project the sphere center onto the sphere");
  return center + radius * dir / n;
}

std::optional<Ball> DomainSpec::excluded_ball() const {
  if (!xbar) return std::nullopt;
  return Ball{*xbar, eps};
}

bool DomainSpec::in_D(const PointRef& x) const {
  return region_contains(omega, x) && (!xbar || (x - *xbar).norm() >= eps);
}

void DomainSpec::validate() const {
  const int d = ambient.dimension();
  if (d < 1) throw UsageError("domain: ambient box must have dimension >= 1");
  if (ambient.upper.size() != d || !((ambient.upper - ambient.lower).array() > 0.0).all()) {
    throw UsageError("domain: ambient box must have upper > lower in every coordinate");
  }
  if (region_dimension(omega) != d || (xbar && xbar->size() != d)) {
    throw UsageError("domain: Omega, xbar and X must share a dimension");
  }
  const Box omega_box = bounding_box(omega);
  if (!ambient.contains(omega_box.lower) || !ambient.contains(omega_box.upper)) {
    throw UsageError("domain: Omega must lie inside the ambient box X");
  }
  if (xbar && !(eps > 0.0)) throw UsageError("domain: eps must be positive");
  if (gamma) {
    if (gamma->dimension() != d) throw UsageError("domain: Gamma dimension mismatch");
    if (!(gamma->radius > 0.0)) throw UsageError("domain: Gamma radius must be positive");
    // Gamma must avoid B_eps(xbar) and sit inside Omega.
    const double gap = xbar ? (gamma->center - *xbar).norm() : 0.0;
    if (xbar && gamma->radius - gap <= eps) {
      throw UsageError("domain: Gamma must not intersect B_eps(xbar) (need R0 > eps)");
    }
    const Box gb = bounding_box(Ball{gamma->center, gamma->radius});
    if (!region_contains(omega, gamma->center) ||
        (std::holds_alternative<Box>(omega) &&
         !(std::get<Box>(omega).contains(gb.lower) && std::get<Box>(omega).contains(gb.upper))) ||
        (std::holds_alternative<Ball>(omega) &&
         (gamma->center - std::get<Ball>(omega).center).norm() + gamma->radius >
             std::get<Ball>(omega).radius + 1e-12)) {
      throw UsageError("domain: Gamma must lie inside Omega");
    }
  }
}

void require_distinct(const PointSet& points, const char* what) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      if ((points.row(i) - points.row(j)).norm() < kDuplicateTolerance) {
        throw DuplicateSiteError(std::string("duplicate ") + what + ": rows " + std::to_string(i) +
                                 " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

namespace {

constexpr std::array<int, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

PointSet halton_points(int dimension, std::int64_t count, std::uint64_t seed) {
  if (dimension < 1 || dimension > static_cast<int>(kPrimes.size())) {
    throw UsageError("halton_points: dimension out of range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd shift(dimension);
  for (int k = 0; k < dimension; ++k) shift(k) = unit(rng);
  PointSet out(count, dimension);
  for (std::int64_t i = 0; i < count; ++i) {
    for (int k = 0; k < dimension; ++k) {
      const double u = radical_inverse(static_cast<std::uint64_t>(i + 1), kPrimes[k]) + shift(k);
      out(i, k) = u - std::floor(u);
    }
  }
  return out;
}

Eigen::VectorXd voronoi_weights(const PointSet& sites, const Box& ambient, std::int64_t n_mc,
                                std::uint64_t seed) {
  const Eigen::Index m = sites.rows();
  if (m < 1) throw UsageError("voronoi_weights: need at least one site");
  if (sites.cols() != ambient.dimension()) throw UsageError("voronoi_weights: dimension mismatch");
  if (n_mc < 10 * m) {
    throw UsageError("voronoi_weights: need at least 10 Monte Carlo samples per site");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!ambient.contains(sites.row(i).transpose())) {
      throw UsageError("voronoi_weights: site " + std::to_string(i) + " lies outside X");
    }
  }
  require_distinct(sites);

  PointSet samples = halton_points(ambient.dimension(), n_mc, seed);
  const Eigen::RowVectorXd extent = (ambient.upper - ambient.lower).transpose();
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    samples.row(s) = ambient.lower.transpose() + samples.row(s).cwiseProduct(extent);
  }
  const std::vector<std::int64_t> counts = kernels::nearest_site_counts(sites, samples);
  const double vol = ambient.volume();
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    w(i) = vol * static_cast<double>(counts[i]) / static_cast<double>(n_mc);
  }
  return w;
}

PointSet fill_distance_candidates(const Region& region, std::int64_t n_candidates,
                                  double* spacing_out) {
  const Box box = bounding_box(region);
  const int d = box.dimension();
  const auto per_axis = std::max<std::int64_t>(
      2, static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n_candidates), 1.0 / d))));
  const Point step = (box.upper - box.lower) / static_cast<double>(per_axis - 1);

  std::vector<double> flat;
  std::vector<std::int64_t> idx(d, 0);
  Point x(d);
  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) total *= per_axis;
  for (std::int64_t n = 0; n < total; ++n) {
    std::int64_t rem = n;
    for (int k = 0; k < d; ++k) {
      idx[k] = rem % per_axis;
      rem /= per_axis;
      x(k) = idx[k] == per_axis - 1 ? box.upper(k) : box.lower(k) + step(k) * idx[k];
    }
    if (region_contains(region, x)) flat.insert(flat.end(), x.data(), x.data() + d);
  }
  // Extreme points: box corners, or the 2d axis poles of a ball.
  if (const auto* ball = std::get_if<Ball>(&region)) {
    for (int k = 0; k < d; ++k) {
      for (double sgn : {-1.0, 1.0}) {
        Point p = ball->center;
        p(k) += sgn * ball->radius;
        flat.insert(flat.end(), p.data(), p.data() + d);
      }
    }
  } else {
    const PointSet c = box.corners();
    flat.insert(flat.end(), c.data(), c.data() + c.size());
  }
  if (spacing_out) *spacing_out = step.maxCoeff();
  return Eigen::Map<PointSet>(flat.data(), static_cast<Eigen::Index>(flat.size() / d), d);
}

FillDistance fill_distance(const PointSet& sites, const Region& region,
                           std::int64_t n_candidates) {
  if (sites.rows() == 0) throw UsageError("fill_distance: empty site list");
  if (sites.cols() != region_dimension(region)) {
    throw UsageError("fill_distance: dimension mismatch");
  }
  FillDistance out;
  const PointSet candidates = fill_distance_candidates(region, n_candidates, &out.candidate_spacing);
  out.value = kernels::max_nearest_distance(sites, candidates);
  return out;
}

PointSet make_grid(const Region& region, double spacing, const std::optional<Ball>& exclusion) {
  if (!(spacing > 0.0)) throw UsageError("make_grid: spacing must be positive");
  const int d = region_dimension(region);
  Point origin;
  std::vector<std::int64_t> lo(d), hi(d);
  if (const auto* box = std::get_if<Box>(&region)) {
    origin = box->lower;
    for (int k = 0; k < d; ++k) {
      lo[k] = 0;
      hi[k] = static_cast<std::int64_t>(
          std::floor((box->upper(k) - box->lower(k)) / spacing + 1e-9));
    }
  } else {
    const auto& ball = std::get<Ball>(region);
    origin = ball.center;
    const auto n = static_cast<std::int64_t>(std::floor(ball.radius / spacing + 1e-9));
    for (int k = 0; k < d; ++k) {
      lo[k] = -n;
      hi[k] = n;
    }
  }

  std::vector<double> flat;
  std::vector<std::int64_t> idx(lo);
  Point x(d);
  const double tol = 1e-9 * spacing;
  while (true) {
    for (int k = 0; k < d; ++k) x(k) = origin(k) + spacing * static_cast<double>(idx[k]);
    const bool excluded = exclusion && (x - exclusion->center).norm() < exclusion->radius;
    if (region_contains(region, x, tol) && !excluded) flat.insert(flat.end(), x.data(), x.data() + d);
    int k = 0;
    while (k < d && ++idx[k] > hi[k]) {
      idx[k] = lo[k];
      ++k;
    }
    if (k == d) break;
  }
  if (flat.empty()) {
    throw UsageError("make_grid: no grid points left; enlarge the region or reduce the spacing");
  }
  return Eigen::Map<PointSet>(flat.data(), static_cast<Eigen::Index>(flat.size() / d), d);
}

PointSet sphere_points(const Sphere& sphere, int n) {
  const int d = sphere.dimension();
  if (n < 1) throw UsageError("sphere_points: need at least one point");
  if (d == 1) {
    PointSet out(2, 1);
    out(0, 0) = sphere.center(0) + sphere.radius;
    out(1, 0) = sphere.center(0) - sphere.radius;
    return out;
  }
  PointSet out(n, d);
  if (d == 2) {
    for (int i = 0; i < n; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / n;
      out(i, 0) = sphere.center(0) + sphere.radius * std::cos(angle);
      out(i, 1) = sphere.center(1) + sphere.radius * std::sin(angle);
    }
    // Snap exact zeros so that axis points are reproduced exactly.
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const double rel = out.data()[i] - sphere.center(i % 2);
      if (std::abs(rel) < 1e-15 * sphere.radius) out.data()[i] = sphere.center(i % 2);
    }
    return out;
  }
  if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = n == 1 ? 0.0 : 1.0 - 2.0 * (i + 0.5) / n;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      out.row(i) << std::cos(phi) * rho, std::sin(phi) * rho, z;
      out.row(i) = sphere.center.transpose() + sphere.radius * out.row(i);
    }
    return out;
  }
  throw UsageError("sphere_points: only d <= 3 is supported");
}

}  // namespace kernlyap
