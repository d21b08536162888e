#include "kernlyap/testbed.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "kernlyap/errors.hpp"

namespace kernlyap::testbed {

bool ReferenceSystem::is_exponentially_stable() const {
  Eigen::EigenSolver<Eigen::MatrixXd> es(jacobian, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

namespace {

DomainSpec square_domain(int d, double omega_half, double ambient_half, double eps,
                         double gamma_radius) {
  DomainSpec dom;
  dom.ambient = Box{Point::Constant(d, -ambient_half), Point::Constant(d, ambient_half)};
  dom.omega = Box{Point::Constant(d, -omega_half), Point::Constant(d, omega_half)};
  dom.xbar = Point::Zero(d);
  dom.eps = eps;
  dom.gamma = Sphere{Point::Zero(d), gamma_radius};
  return dom;
}

double decay_rate(const Eigen::MatrixXd& jacobian) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(jacobian, false);
  return -es.eigenvalues().real().maxCoeff();
}

}  // namespace

ReferenceSystem linear_system(std::string name, const Eigen::MatrixXd& a, DomainSpec domain) {
  ReferenceSystem sys;
  sys.name = std::move(name);
  sys.dimension = static_cast<int>(a.rows());
  sys.field = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
  sys.xbar = Point::Zero(sys.dimension);
  sys.jacobian = a;
  sys.linear_matrix = a;
  sys.domain = std::move(domain);
  return sys;
}

ReferenceSystem make_system(const std::string& name) {
  if (name == "linear1d") {
    return linear_system(name, Eigen::MatrixXd::Constant(1, 1, -1.0),
                         square_domain(1, 1.0, 1.5, 0.1, 0.5));
  }
  if (name == "linear2d") {
    Eigen::MatrixXd a(2, 2);
    a << -1.0, 2.0, -3.0, -1.0;
    return linear_system(name, a, square_domain(2, 1.0, 1.5, 0.2, 0.8));
  }
  if (name == "decay2d") {
    return linear_system(name, -Eigen::MatrixXd::Identity(2, 2),
                         square_domain(2, 1.2, 1.7, 0.2, 1.0));
  }
  if (name == "nonlinear2d") {
    ReferenceSystem sys;
    sys.name = name;
    sys.dimension = 2;
    sys.field = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      Eigen::VectorXd f(2);
      f << -x(0) + 0.25 * x(1) * x(1), -x(1) + 0.25 * x(0) * x(1);
      return f;
    };
    sys.xbar = Point::Zero(2);
    sys.jacobian = -Eigen::MatrixXd::Identity(2, 2);
    sys.domain = square_domain(2, 1.0, 1.5, 0.2, 0.8);
    return sys;
  }
  throw UsageError("unknown system '" + name + "'");
}

std::vector<std::string> system_names() { return {"linear1d", "linear2d", "nonlinear2d", "decay2d"}; }

std::string to_string(NoiseFamily family) {
  return family == NoiseFamily::gaussian ? "gaussian" : "uniform";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform") return NoiseFamily::uniform;
  throw UsageError("unknown noise family '" + name + "'");
}

SampleSet generate_data(const ReferenceSystem& sys, const PointSet& sites, const NoiseModel& noise) {
  if (sites.cols() != sys.dimension) throw UsageError("generate_data: site dimension mismatch");
  if (!(noise.sigma >= 0.0)) throw UsageError("generate_data: sigma must be non-negative");
  SampleSet z;
  z.sites = sites;
  z.sigma = noise.sigma;
  z.values.resize(sites.rows(), sites.cols());
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-std::sqrt(3.0), std::sqrt(3.0));
  for (Eigen::Index i = 0; i < sites.rows(); ++i) {
    z.values.row(i) = sys.field(sites.row(i).transpose()).transpose();
    if (noise.sigma == 0.0) continue;
    for (Eigen::Index k = 0; k < sites.cols(); ++k) {
      const double eta = noise.family == NoiseFamily::gaussian ? gauss(rng) : unif(rng);
      z.values(i, k) += noise.sigma * eta;
    }
  }
  return z;
}

std::string to_string(SiteLayout layout) {
  switch (layout) {
    case SiteLayout::random: return "random";
    case SiteLayout::halton: return "halton";
    case SiteLayout::grid: return "grid";
  }
  return "random";
}

SiteLayout site_layout_from_string(const std::string& name) {
  if (name == "random") return SiteLayout::random;
  if (name == "halton") return SiteLayout::halton;
  if (name == "grid") return SiteLayout::grid;
  throw UsageError("unknown site layout '" + name + "'");
}

PointSet make_sites(const Box& box, std::int64_t m, SiteLayout layout, std::uint64_t seed) {
  const int d = box.dimension();
  if (m < 1) throw UsageError("make_sites: need at least one site");
  const Eigen::RowVectorXd lo = box.lower.transpose();
  const Eigen::RowVectorXd extent = (box.upper - box.lower).transpose();
  PointSet unit(m, d);
  switch (layout) {
    case SiteLayout::random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (Eigen::Index i = 0; i < unit.size(); ++i) unit.data()[i] = u(rng);
      break;
    }
    case SiteLayout::halton:
      unit = halton_points(d, m, seed);
      break;
    case SiteLayout::grid: {
      const auto n = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(m), 1.0 / d)));
      std::int64_t total = 1;
      for (int k = 0; k < d; ++k) total *= n;
      if (total != m) throw UsageError("make_sites: grid layout needs m to be a perfect d-th power");
      for (std::int64_t i = 0; i < m; ++i) {
        std::int64_t rem = i;
        for (int k = 0; k < d; ++k) {
          unit(i, k) = (static_cast<double>(rem % n) + 0.5) / static_cast<double>(n);
          rem /= n;
        }
      }
      break;
    }
  }
  PointSet out(m, d);
  for (Eigen::Index i = 0; i < m; ++i) out.row(i) = lo + unit.row(i).cwiseProduct(extent);
  return out;
}

Eigen::MatrixXd oracle_V_quadratic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index d = a.rows();
  if (a.cols() != d || q.rows() != d || q.cols() != d) {
    throw UsageError("oracle_V_quadratic: A and Q must be square and of equal size");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (!(es.eigenvalues().real().array() < 0.0).all()) {
    throw UsageError("oracle_V_quadratic: A is not Hurwitz");
  }
  // vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P), column-major vec.
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd at = a.transpose();
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      kron.block(i * d, j * d, d, d) += id(i, j) * at;
      kron.block(i * d, j * d, d, d) += at(i, j) * id;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Eigen::MatrixXd(q).data(), d * d);
  const Eigen::VectorXd vec_p = kron.partialPivLu().solve(rhs);
  const Eigen::MatrixXd p = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), d, d);
  return 0.5 * (p + p.transpose());
}

Eigen::VectorXd rk4_step(const VectorField& f, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd rk4_flow(const VectorField& f, const Eigen::VectorXd& x0, double t, double h) {
  if (!(h > 0.0)) throw UsageError("rk4_flow: step must be positive");
  const double dir = t < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(t);
  const auto steps = static_cast<std::int64_t>(std::ceil(span / h - 1e-12));
  Eigen::VectorXd x = x0;
  for (std::int64_t i = 0; i < steps; ++i) {
    const double hi = std::min(h, span - static_cast<double>(i) * h);
    x = rk4_step(f, x, dir * hi);
  }
  return x;
}

namespace {

// Integrates (x, J)' = (f(x), p(x)) until x reaches the tail ball.
struct AugmentedRun {
  double integral = 0.0;
  Eigen::VectorXd end;
};

AugmentedRun integrate_p(const ReferenceSystem& sys, const PFunction& p, const Eigen::VectorXd& x0,
                         double h, const FlowOptions& opt) {
  const int d = sys.dimension;
  const VectorField aug = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    Eigen::VectorXd out(d + 1);
    const Eigen::VectorXd x = z.head(d);
    out.head(d) = sys.field(x);
    out(d) = p(x);
    return out;
  };
  Eigen::VectorXd z(d + 1);
  z.head(d) = x0;
  z(d) = 0.0;
  double t = 0.0;
  while ((z.head(d) - sys.xbar).norm() >= opt.tail_radius) {
    if (t > opt.t_max || !z.allFinite() || (z.head(d) - sys.xbar).norm() > opt.blowup_radius) {
      throw NumericalError("oracle_V_flow: trajectory does not contract to the equilibrium; "
                           "point is not in the basin");
    }
    z = rk4_step(aug, z, h);
    t += h;
  }
  return {z(d), z.head(d)};
}

}  // namespace

OracleValue oracle_V_flow(const ReferenceSystem& sys, const PFunction& p, const Eigen::VectorXd& x,
                          const FlowOptions& options) {
  if (x.size() != sys.dimension) throw UsageError("oracle_V_flow: dimension mismatch");
  const AugmentedRun fine = integrate_p(sys, p, x, options.step, options);
  const AugmentedRun coarse = integrate_p(sys, p, x, 2.0 * options.step, options);
  const double rate = decay_rate(sys.jacobian);
  // Near xbar, p(phi(t)) ~ p(x_end) e^{-2 rate t}.
  const double tail = p(fine.end) / (2.0 * rate);
  OracleValue out;
  out.value = fine.integral + tail;
  out.error_estimate = std::abs(fine.integral - coarse.integral) / 15.0 + tail;
  return out;
}

CrossingResult oracle_T_flow(const ReferenceSystem& sys, const Sphere& gamma, double cbar,
                             const ScalarFunction& xi_t, const Eigen::VectorXd& x,
                             const FlowOptions& options) {
  if (x.size() != sys.dimension || gamma.dimension() != sys.dimension) {
    throw UsageError("oracle_T_flow: dimension mismatch");
  }
  const auto xi = [&](const Eigen::VectorXd& y) { return xi_t ? xi_t(y) : 0.0; };
  CrossingResult out;
  const double h0 = gamma.level(x);
  if (h0 == 0.0) {
    out.hit = x;
    out.value = xi(x);
    return out;
  }
  // Outside Gamma: flow forward until h <= 0. Inside: flow backward until h >= 0.
  const double dir = h0 > 0.0 ? 1.0 : -1.0;
  const VectorField f = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return dir * sys.field(y);
  };
  const auto crossed = [&](const Eigen::VectorXd& y) { return dir * gamma.level(y) <= 0.0; };

  const double h = options.step;
  Eigen::VectorXd cur = x;
  double t = 0.0;
  while (true) {
    if (t > options.t_max || !cur.allFinite() || cur.norm() > options.blowup_radius) {
      throw NumericalError("oracle_T_flow: trajectory does not cross Gamma");
    }
    const Eigen::VectorXd next = rk4_step(f, cur, h);
    if (crossed(next)) break;
    cur = next;
    t += h;
  }
  double lo = 0.0;
  double hi = h;
  while (hi - lo > options.crossing_tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (crossed(rk4_step(f, cur, mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double tau = 0.5 * (lo + hi);
  out.hit = rk4_step(f, cur, tau);
  out.theta = dir * (t + tau);
  if (gamma.level_gradient(out.hit).dot(sys.field(out.hit)) >= 0.0) {
    throw NumericalError("oracle_T_flow: Gamma is not crossed inward at the hit point");
  }
  out.value = xi(out.hit) + cbar * out.theta;
  return out;
}

}  // namespace kernlyap::testbed
