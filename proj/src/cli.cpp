#include "kernlyap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "kernlyap/errors.hpp"
#include "kernlyap/geometry.hpp"
#include "kernlyap/io.hpp"
#include "kernlyap/kernels.hpp"
#include "kernlyap/lyap.hpp"
#include "kernlyap/testbed.hpp"
#include "kernlyap/vfield.hpp"

namespace kernlyap::cli {

namespace {

// K1 support radius as a fraction of diam(Omega).
constexpr double kFieldSupportFactor = 0.6;
// K2 support radius as a multiple of diam(Omega).
constexpr double kLyapunovSupportFactor = 2.0;

const std::map<std::string, json>& defaults_table() {
  static const std::map<std::string, json> table = {
      {"gen",
       {{"system", "linear2d"},
        {"m", 400},
        {"sigma", 0.05},
        {"noise", "gaussian"},
        {"sites", "random"},
        {"seed", 7},
        {"out", "samples.csv"}}},
      {"diag",
       {{"data", ""},
        {"system", ""},
        {"domain", json::object()},
        {"mc_per_site", 100},
        {"min_mc", 20000},
        {"fill_candidates", 40000},
        {"seed", 0},
        {"out", ""}}},
      {"fit-vf",
       {{"data", ""},
        {"system", ""},
        {"domain", json::object()},
        {"lambda", "auto"},
        {"r", 1.0},
        {"delta", 0.05},
        {"k1", 3},
        {"support1", nullptr},
        {"solver", "weighted_lu"},
        {"mc_per_site", 100},
        {"min_mc", 20000},
        {"fill_candidates", 40000},
        {"seed", 0},
        {"out", "vf.json"}}},
      {"fit-lyap",
       {{"vf", ""},
        {"field", "model"},
        {"system", ""},
        {"domain", json::object()},
        {"eps", nullptr},
        {"mode", "V"},
        {"spacing", 0.1},
        {"points", ""},
        {"k2", 2},
        {"support2", nullptr},
        {"p_matrix", nullptr},
        {"cbar", 1.0},
        {"xiT", 0.0},
        {"gamma_n", 32},
        {"gamma_points", ""},
        {"gamma_clearance", 0.25},
        {"fill_candidates", 40000},
        {"out", "lyap.json"}}},
      {"verify",
       {{"lyap", ""},
        {"system", ""},
        {"spacing", nullptr},
        {"oracle_samples", 200},
        {"gamma_samples", 512},
        {"out", "report.json"},
        {"grid_csv", ""}}},
  };
  return table;
}

// ---------------------------------------------------------------------------
// config helpers

std::string str(const json& c, const char* key) {
  const json& v = c.at(key);
  if (!v.is_string()) throw UsageError(std::string("config key '") + key + "' must be a string");
  return v.get<std::string>();
}

double num(const json& c, const char* key) {
  const json& v = c.at(key);
  if (!v.is_number()) throw UsageError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& c, const char* key) {
  const json& v = c.at(key);
  if (!v.is_number_integer()) {
    throw UsageError(std::string("config key '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t seed_of(const json& c) {
  const std::int64_t s = integer(c, "seed");
  if (s < 0) throw UsageError("seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::optional<testbed::ReferenceSystem> system_of(const json& c) {
  if (!c.contains("system") || !c["system"].is_string()) return std::nullopt;
  const std::string name = c["system"].get<std::string>();
  if (name.empty()) return std::nullopt;
  return testbed::make_system(name);
}

// System default, else `fallback`, patched by the config "domain" object.
DomainSpec resolve_domain(const json& c, const std::optional<testbed::ReferenceSystem>& sys,
                          const std::optional<DomainSpec>& fallback) {
  std::optional<DomainSpec> base;
  if (sys) {
    base = sys->domain;
  } else if (fallback) {
    base = fallback;
  }
  const json patch = c.value("domain", json::object());
  if (!patch.is_object()) throw UsageError("config key 'domain' must be an object");
  DomainSpec d = io::domain_from_json(patch, base ? &*base : nullptr);
  if (c.contains("eps") && !c["eps"].is_null()) {
    d.eps = num(c, "eps");
    d.validate();
  }
  return d;
}

DomainSpec bounding_domain(const PointSet& sites) {
  DomainSpec d;
  const Point lo = sites.colwise().minCoeff().transpose();
  const Point hi = sites.colwise().maxCoeff().transpose();
  const Point pad = ((hi - lo).array() > 0.0).select(Point::Zero(lo.size()), Point::Ones(lo.size()));
  d.ambient = Box{lo - pad, hi + pad};
  d.omega = d.ambient;
  return d;
}

std::string require_path(const json& c, const char* key) {
  const std::string p = str(c, key);
  if (p.empty()) throw UsageError(std::string("missing required --") + key);
  return p;
}

void write_json(const json& doc, const std::string& path) {
  io::write_file_atomic(path, doc.dump(2) + "\n");
}

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

// Max distance from a dense sampling of Gamma to the nearest Gamma node.
double sphere_fill_distance(const Sphere& gamma, const PointSet& nodes) {
  const PointSet dense = sphere_points(gamma, gamma.dimension() == 3 ? 20000 : 8192);
  return kernels::max_nearest_distance(nodes, dense);
}

// Fill distance of q over D = Omega minus the excluded ball.
double fill_distance_in_D(const PointSet& q, const DomainSpec& domain, std::int64_t n_candidates) {
  const PointSet all = fill_distance_candidates(domain.omega, n_candidates);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < all.rows(); ++i) {
    if (domain.in_D(all.row(i).transpose())) keep.push_back(i);
  }
  PointSet cand(static_cast<Eigen::Index>(keep.size()), all.cols());
  for (std::size_t n = 0; n < keep.size(); ++n) cand.row(n) = all.row(keep[n]);
  return kernels::max_nearest_distance(q, cand);
}

}  // namespace

json default_config(const std::string& command) {
  const auto& table = defaults_table();
  const auto it = table.find(command);
  if (it == table.end()) throw UsageError("unknown command '" + command + "'");
  json c = it->second;
  c["command"] = command;
  return c;
}

// ---------------------------------------------------------------------------
// gen

json cmd_gen(const json& c) {
  const auto sys = system_of(c);
  if (!sys) throw UsageError("gen: --system is required");
  const std::int64_t m = integer(c, "m");
  if (m < 1) throw UsageError("gen: --m must be at least 1");
  const double sigma = num(c, "sigma");
  if (!(sigma >= 0.0)) throw UsageError("gen: --sigma must be non-negative");
  const std::uint64_t seed = seed_of(c);
  const DomainSpec domain = resolve_domain(c, sys, std::nullopt);

  const PointSet sites = testbed::make_sites(
      domain.ambient, m, testbed::site_layout_from_string(str(c, "sites")), seed);
  const testbed::NoiseModel noise{testbed::noise_family_from_string(str(c, "noise")), sigma,
                                  seed ^ 0x9e3779b97f4a7c15ULL};
  const SampleSet z = testbed::generate_data(*sys, sites, noise);
  io::write_file_atomic(require_path(c, "out"), io::format_samples(z));
  return {{"rows", m}, {"out", str(c, "out")}, {"dataset_hash", dataset_hash(z)}, {"config", c}};
}

// ---------------------------------------------------------------------------
// diag / fit-vf

namespace {

struct Design {
  SampleSet z;
  DomainSpec domain;
  double candidate_spacing = 0.0;
};

Design load_design(const json& c) {
  Design out;
  out.z = io::read_samples(require_path(c, "data"));
  if (out.z.size() < 1) throw UsageError("data file has no samples");
  const auto sys = system_of(c);
  if (sys && sys->dimension != out.z.dimension()) {
    throw UsageError("data dimension differs from the system dimension");
  }
  out.domain = resolve_domain(c, sys, bounding_domain(out.z.sites));
  const DesignOptions opts{integer(c, "mc_per_site"), integer(c, "min_mc"),
                           integer(c, "fill_candidates"), seed_of(c)};
  attach_design(out.z, out.domain.ambient, opts);
  fill_distance_candidates(Region{out.domain.ambient}, opts.fill_candidates, &out.candidate_spacing);
  return out;
}

}  // namespace

json cmd_diag(const json& c) {
  const Design d = load_design(c);
  json report = {{"m", d.z.size()},
                 {"w_norm", d.z.weight_norm()},
                 {"h_x", d.z.fill_distance},
                 {"h_x_candidate_spacing", d.candidate_spacing},
                 {"weights_sum", d.z.weights.sum()},
                 {"volume_X", d.domain.ambient.volume()},
                 {"weights", io::to_json(d.z.weights)},
                 {"domain", io::to_json(d.domain)},
                 {"config", c}};
  const std::string out = str(c, "out");
  if (!out.empty()) write_json(report, out);
  return report;
}

json cmd_fit_vf(const json& c) {
  const Design d = load_design(c);
  const int dim = d.z.dimension();
  const double support = c.at("support1").is_null()
                             ? kFieldSupportFactor * region_diameter(d.domain.omega)
                             : num(c, "support1");
  if (!(support > 0.0)) throw UsageError("fit-vf: --support1 must be positive");
  const WendlandKernel k1(dim, static_cast<int>(integer(c, "k1")), 1.0 / support);

  FitOptions opts;
  opts.solver = solve_form_from_string(str(c, "solver"));
  opts.r = num(c, "r");
  opts.delta = num(c, "delta");
  opts.seed = seed_of(c);
  const double rule_lambda = choose_lambda(d.z.weight_norm(), d.z.fill_distance, opts.r, opts.delta);
  double lambda = rule_lambda;
  const json& jl = c.at("lambda");
  if (jl.is_number()) {
    lambda = jl.get<double>();
  } else if (!(jl.is_string() && jl.get<std::string>() == "auto")) {
    throw UsageError("fit-vf: --lambda must be 'auto' or a positive number");
  }

  const VectorFieldModel model = fit_vector_field(d.z, k1, lambda, opts);
  json doc = io::to_json(model);
  doc["domain"] = io::to_json(d.domain);
  doc["diagnostics"] = {{"m", d.z.size()},
                        {"w_norm", d.z.weight_norm()},
                        {"h_x", d.z.fill_distance},
                        {"h_x_candidate_spacing", d.candidate_spacing},
                        {"lambda", lambda},
                        {"lambda_rule", rule_lambda},
                        {"lambda_auto", jl.is_string()},
                        {"support_radius", support},
                        {"normal_residual", model.provenance().normal_residual},
                        {"condition_estimate", model.provenance().condition_estimate}};
  doc["config"] = c;
  write_json(doc, require_path(c, "out"));
  return doc;
}

// ---------------------------------------------------------------------------
// fit-lyap

json cmd_fit_lyap(const json& c) {
  const auto sys = system_of(c);
  const std::string field_kind = str(c, "field");
  std::optional<VectorFieldModel> vf;
  std::optional<DomainSpec> vf_domain;
  json field_doc;
  if (field_kind == "model") {
    const json vf_doc = json::parse(io::read_file(require_path(c, "vf")));
    vf = io::vector_field_from_json(vf_doc);
    if (vf_doc.contains("domain")) vf_domain = io::domain_from_json(vf_doc["domain"]);
    field_doc = vf_doc;
    field_doc.erase("config");
  } else if (field_kind == "exact") {
    if (!sys) throw UsageError("fit-lyap: --field exact needs --system");
    field_doc = {{"exact", sys->name}};
  } else {
    throw UsageError("fit-lyap: --field must be 'model' or 'exact'");
  }
  const DomainSpec domain = resolve_domain(c, sys, vf_domain);
  const int dim = domain.dimension();
  if (vf && vf->dimension() != dim) throw UsageError("fit-lyap: field/domain dimension mismatch");
  const LyapunovMode mode = lyapunov_mode_from_string(str(c, "mode"));
  const double spacing = num(c, "spacing");

  // Collocation candidates.
  PointSet q;
  std::int64_t excluded = 0;
  const std::optional<Ball> ball = domain.excluded_ball();
  if (!str(c, "points").empty()) {
    const PointSet raw = io::read_points(str(c, "points"));
    if (raw.cols() != dim) throw UsageError("fit-lyap: collocation point dimension mismatch");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      if (ball && ball->contains(raw.row(i).transpose(), -1e-15)) {
        ++excluded;
      } else {
        keep.push_back(i);
      }
    }
    q.resize(static_cast<Eigen::Index>(keep.size()), dim);
    for (std::size_t n = 0; n < keep.size(); ++n) q.row(n) = raw.row(keep[n]);
  } else {
    const PointSet full = make_grid(domain.omega, spacing);
    q = make_grid(domain.omega, spacing, ball);
    excluded = full.rows() - q.rows();
  }

  // Gamma nodes (T mode).
  PointSet gamma_pts(0, dim);
  std::int64_t near_gamma = 0;
  if (mode == LyapunovMode::T) {
    if (!str(c, "gamma_points").empty()) {
      gamma_pts = io::read_points(str(c, "gamma_points"));
    } else if (domain.gamma && integer(c, "gamma_n") > 0) {
      gamma_pts = sphere_points(*domain.gamma, static_cast<int>(integer(c, "gamma_n")));
    }
    if (gamma_pts.rows() < 1) {
      throw UsageError("fit-lyap: T mode needs at least one point on Gamma "
                       "(set domain.gamma with gamma_n >= 1, or --gamma-points)");
    }
    if (gamma_pts.cols() != dim) throw UsageError("fit-lyap: Gamma point dimension mismatch");
    // Drop interior candidates that crowd a Gamma node.
    const double clearance = num(c, "gamma_clearance") * spacing;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < gamma_pts.rows(); ++j) {
        nearest = std::min(nearest, (q.row(i) - gamma_pts.row(j)).norm());
      }
      if (nearest >= clearance) keep.push_back(i);
    }
    near_gamma = q.rows() - static_cast<std::int64_t>(keep.size());
    PointSet kept(static_cast<Eigen::Index>(keep.size()), dim);
    for (std::size_t n = 0; n < keep.size(); ++n) kept.row(n) = q.row(keep[n]);
    q = std::move(kept);
  }

  // Field-magnitude screening.
  PointSet values(q.rows(), dim);
  if (vf) {
    values = vf->evaluate(q);
  } else {
    for (Eigen::Index i = 0; i < q.rows(); ++i) values.row(i) = sys->field(q.row(i).transpose()).transpose();
  }
  ScreenResult screened = screen_collocation(q, values);
  if (screened.kept.size() == 0) {
    throw NumericalError("fit-lyap: every collocation point was screened out (field norm below " +
                         io::format_double(kMinFieldNorm) +
                         "); use a larger eps or denser/less regularized data");
  }

  const double support = c.at("support2").is_null()
                             ? kLyapunovSupportFactor * region_diameter(domain.omega)
                             : num(c, "support2");
  if (!(support > 0.0)) throw UsageError("fit-lyap: --support2 must be positive");
  const int k2 = static_cast<int>(integer(c, "k2"));
  const WendlandKernel kernel(dim, k2, 1.0 / support);
  json warnings = json::array();
  if (vf && k2 > vf->kernel().smoothness()) {
    warnings.push_back("k2 exceeds the smoothness index k1 of the field kernel");
  }

  std::optional<LyapunovModel> model;
  if (mode == LyapunovMode::V) {
    if (!domain.xbar) throw UsageError("fit-lyap: V mode needs an equilibrium estimate xbar");
    PFunction p = PFunction::quadratic(*domain.xbar);
    if (!c.at("p_matrix").is_null()) {
      const json& jq = c["p_matrix"];
      Eigen::MatrixXd qm(dim, dim);
      if (!jq.is_array() || jq.size() != static_cast<std::size_t>(dim)) {
        throw UsageError("fit-lyap: --p-matrix must be a d x d array");
      }
      for (int r = 0; r < dim; ++r) qm.row(r) = io::vector_from_json(jq[r]).transpose();
      p = PFunction::quadratic_form(*domain.xbar, qm);
    }
    model = fit_V(screened.kept, kernel, p);
  } else {
    if (domain.gamma) {
      // Gamma must be crossed transversally: <grad h, f> != 0 at every node.
      const PointSet fg = vf ? vf->evaluate(gamma_pts) : [&] {
        PointSet out(gamma_pts.rows(), dim);
        for (Eigen::Index j = 0; j < gamma_pts.rows(); ++j) {
          out.row(j) = sys->field(gamma_pts.row(j).transpose()).transpose();
        }
        return out;
      }();
      std::int64_t tangential = 0;
      for (Eigen::Index j = 0; j < gamma_pts.rows(); ++j) {
        const Eigen::VectorXd n = gamma_pts.row(j).transpose() - domain.gamma->center;
        const Eigen::VectorXd fj = fg.row(j).transpose();
        if (std::abs(n.dot(fj)) <= 1e-8 * n.norm() * std::max(fj.norm(), 1e-300)) ++tangential;
      }
      if (tangential > 0) {
        warnings.push_back("field is tangential to Gamma at " + std::to_string(tangential) +
                           " node(s); Gamma may not be non-characteristic");
      }
    }
    const double xi = num(c, "xiT");
    model = fit_T(screened.kept, gamma_pts, kernel, num(c, "cbar"),
                  [xi](const Eigen::VectorXd&) { return xi; });
  }

  json doc = io::to_json(*model);
  doc["domain"] = io::to_json(domain);
  doc["field_model"] = field_doc;
  const double hq = fill_distance_in_D(model->collocation().points, domain,
                                       integer(c, "fill_candidates"));
  json diag = {{"M", model->collocation().size()},
               {"N", model->gamma_points().rows()},
               {"excluded_in_ball", excluded},
               {"removed_near_gamma", near_gamma},
               {"screened_small_field", screened.dropped.size()},
               {"spacing", spacing},
               {"h_q", hq},
               {"support_radius", support},
               {"max_collocation_residual", model->provenance.max_collocation_residual},
               {"jitter_applied", model->provenance.jitter_applied},
               {"warnings", warnings}};
  if (mode == LyapunovMode::T && domain.gamma) {
    diag["h_qtilde"] = sphere_fill_distance(*domain.gamma, model->gamma_points());
  }
  doc["diagnostics"] = diag;
  doc["config"] = c;
  write_json(doc, require_path(c, "out"));
  return doc;
}

// ---------------------------------------------------------------------------
// verify

namespace {

struct ResidualStats {
  double negativity = 0.0;
  double sup = 0.0;
  double mean = 0.0;
};

ResidualStats residual_stats(const Eigen::VectorXd& orbital, const Eigen::VectorXd& target) {
  ResidualStats s;
  const Eigen::ArrayXd res = (orbital - target).array().abs();
  s.sup = res.maxCoeff();
  s.mean = res.mean();
  s.negativity = static_cast<double>((orbital.array() < 0.0).count()) / static_cast<double>(orbital.size());
  return s;
}

json to_json(const ResidualStats& s) {
  return {{"negativity_fraction", s.negativity},
          {"sup_residual", finite_or_zero(s.sup)},
          {"mean_residual", finite_or_zero(s.mean)}};
}

}  // namespace

json cmd_verify(const json& c) {
  const std::string lyap_path = require_path(c, "lyap");
  const json doc = json::parse(io::read_file(lyap_path));
  const LyapunovModel model = io::lyapunov_from_json(doc);
  const DomainSpec domain = io::domain_from_json(doc.at("domain"));
  const int dim = domain.dimension();
  const json lyap_config = doc.value("config", json::object());

  // Named system: explicit flag, else the one recorded by fit-lyap.
  std::optional<testbed::ReferenceSystem> sys = system_of(c);
  if (!sys) sys = system_of(lyap_config);
  if (sys && sys->dimension != dim) throw UsageError("verify: system dimension mismatch");

  // Field used to build the model.
  const json& fdoc = doc.at("field_model");
  std::optional<VectorFieldModel> vf;
  std::optional<testbed::ReferenceSystem> exact_sys;
  if (fdoc.contains("exact")) {
    exact_sys = testbed::make_system(fdoc["exact"].get<std::string>());
  } else {
    vf = io::vector_field_from_json(fdoc);
  }

  const json diag_in = doc.value("diagnostics", json::object());
  const double h_q = diag_in.value("h_q", 0.0);
  double spacing = c.at("spacing").is_null() ? 0.5 * h_q : num(c, "spacing");
  if (!(spacing > 0.0)) throw UsageError("verify: grid spacing must be positive");

  PointSet grid;
  try {
    grid = make_grid(domain.omega, spacing, domain.excluded_ball());
  } catch (const UsageError&) {
    throw NumericalError("verify: the verification set D = Omega \\ B_eps(xbar) has no grid points");
  }
  const Eigen::Index n = grid.rows();

  const kernels::ExpansionField ev = model.evaluate(grid);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    target(i) = model.mode() == LyapunovMode::V ? -model.pfun(grid.row(i).transpose()) : -model.cbar;
  }

  PointSet fitted_values(n, dim);
  if (vf) {
    fitted_values = vf->evaluate(grid);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      fitted_values.row(i) = exact_sys->field(grid.row(i).transpose()).transpose();
  }
  const Eigen::VectorXd orbital_fitted = ev.gradient.cwiseProduct(fitted_values).rowwise().sum();
  const ResidualStats fitted = residual_stats(orbital_fitted, target);

  json report;
  report["mode"] = to_string(model.mode());
  report["grid"] = {{"spacing", spacing}, {"points_in_D", n}};
  report["h_q"] = h_q;
  if (diag_in.contains("h_qtilde")) report["h_qtilde"] = diag_in["h_qtilde"];
  if (vf) {
    report["h_x"] = vf->provenance().h_x;
    report["w_norm"] = vf->provenance().w_norm;
    report["lambda"] = vf->lambda();
  }
  report["max_collocation_residual"] = collocation_residual(model);
  report["fitted_field"] = to_json(fitted);
  report["negativity_fraction"] = fitted.negativity;

  Eigen::VectorXd orbital_true;
  std::optional<Eigen::VectorXd> oracle_values;
  if (sys) {
    PointSet true_values(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
      true_values.row(i) = sys->field(grid.row(i).transpose()).transpose();
    orbital_true = ev.gradient.cwiseProduct(true_values).rowwise().sum();
    const ResidualStats truth = residual_stats(orbital_true, target);
    report["true_field"] = to_json(truth);
    report["negativity_fraction"] = truth.negativity;

    json oracle = json::object();
    if (model.mode() == LyapunovMode::V && sys->linear_matrix) {
      // Exact quadratic V on every grid point.
      const Eigen::MatrixXd pm = testbed::oracle_V_quadratic(*sys->linear_matrix, model.pfun.q);
      Eigen::VectorXd vals(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd y = grid.row(i).transpose() - model.pfun.xbar;
        vals(i) = y.dot(pm * y);
      }
      oracle_values = vals;
      oracle["method"] = "lyapunov_equation";
      oracle["samples"] = n;
      const Eigen::ArrayXd diff = (ev.value - vals).array();
      oracle["value_sup_error"] = diff.abs().maxCoeff();
      oracle["value_sup_error_up_to_constant"] = 0.5 * (diff.maxCoeff() - diff.minCoeff());
    } else {
      // Flow oracle on a deterministic subsample.
      const std::int64_t want = std::max<std::int64_t>(1, integer(c, "oracle_samples"));
      const Eigen::Index stride = std::max<Eigen::Index>(1, n / want);
      std::vector<double> diffs;
      std::int64_t failures = 0;
      for (Eigen::Index i = 0; i < n; i += stride) {
        const Eigen::VectorXd x = grid.row(i).transpose();
        try {
          double truth_value;
          if (model.mode() == LyapunovMode::V) {
            truth_value = testbed::oracle_V_flow(*sys, model.pfun, x).value;
          } else {
            if (!domain.gamma) break;
            const double xi = model.xi_values.size() ? model.xi_values(0) : 0.0;
            truth_value = testbed::oracle_T_flow(*sys, *domain.gamma, model.cbar,
                                                 [xi](const Eigen::VectorXd&) { return xi; }, x)
                              .value;
          }
          diffs.push_back(model(x) - truth_value);
        } catch (const NumericalError&) {
          ++failures;
        }
      }
      if (!diffs.empty()) {
        const auto [lo, hi] = std::minmax_element(diffs.begin(), diffs.end());
        double sup = 0.0;
        for (double v : diffs) sup = std::max(sup, std::abs(v));
        oracle["method"] = "flow_integration";
        oracle["samples"] = diffs.size();
        oracle["failures"] = failures;
        oracle["value_sup_error"] = sup;
        oracle["value_sup_error_up_to_constant"] = 0.5 * (*hi - *lo);
      }
    }
    if (!oracle.empty()) report["oracle"] = oracle;
  }

  if (model.mode() == LyapunovMode::T) {
    const Eigen::VectorXd at_nodes = model.evaluate(model.gamma_points()).value;
    json g = {{"node_sup_error", (at_nodes - model.xi_values).cwiseAbs().maxCoeff()},
              {"nodes", model.gamma_points().rows()}};
    if (domain.gamma && model.xi_values.size() > 0 &&
        (model.xi_values.array() == model.xi_values(0)).all()) {
      // Constant xi_T: T equals xi_T everywhere on Gamma.
      const PointSet dense = sphere_points(*domain.gamma, static_cast<int>(integer(c, "gamma_samples")));
      g["sup_error"] = (model.evaluate(dense).value.array() - model.xi_values(0)).abs().maxCoeff();
      g["samples"] = dense.rows();
    }
    report["gamma"] = g;
  }
  report["config"] = c;

  const std::string csv = str(c, "grid_csv");
  if (!csv.empty()) {
    std::vector<std::string> header;
    for (int k = 1; k <= dim; ++k) header.push_back("x" + std::to_string(k));
    header.insert(header.end(), {"value", "orbital_fitted", "target"});
    const bool with_true = orbital_true.size() == n;
    if (with_true) header.push_back("orbital_true");
    if (oracle_values) header.push_back("oracle_value");
    Eigen::MatrixXd rows(n, static_cast<Eigen::Index>(header.size()));
    rows.leftCols(dim) = grid;
    rows.col(dim) = ev.value;
    rows.col(dim + 1) = orbital_fitted;
    rows.col(dim + 2) = target;
    Eigen::Index col = dim + 3;
    if (with_true) rows.col(col++) = orbital_true;
    if (oracle_values) rows.col(col++) = *oracle_values;
    io::write_file_atomic(csv, io::format_csv(header, rows));
  }
  write_json(report, require_path(c, "out"));
  return report;
}

// ---------------------------------------------------------------------------
// argument handling

namespace {

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

// Keys whose string default also admits a number ("auto" or a value).
bool accepts_number(const std::string& key) { return key == "lambda"; }

json coerce(const std::string& key, const json& def, const std::string& raw) {
  if (def.is_string()) {
    if (accepts_number(key)) {
      try {
        const json v = json::parse(raw);
        if (v.is_number()) return v;
      } catch (const json::parse_error&) {
      }
    }
    return raw;
  }
  try {
    return json::parse(raw);
  } catch (const json::parse_error&) {
    return raw;
  }
}

const std::map<std::string, std::string>& help_text() {
  static const std::map<std::string, std::string> h = {
      {"gen", "generate noisy samples of a reference system (CSV)"},
      {"diag", "Voronoi weights and fill distance of a dataset"},
      {"fit-vf", "fit the vector field by weighted regularized least squares"},
      {"fit-lyap", "fit V or T by orbital-derivative collocation"},
      {"verify", "evaluate orbital derivatives on D and write a verification report"},
  };
  return h;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"kernlyap: Lyapunov functions from noisy vector-field samples"};
  app.require_subcommand(1);
  struct Sub {
    CLI::App* app;
    std::string config_path;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Sub> subs;
  for (const auto& [name, defaults] : defaults_table()) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help_text().at(name));
    s.app->add_option("--config", s.config_path, "JSON file with config overrides");
    for (const auto& [key, value] : defaults.items()) {
      s.app->add_option(flag_name(key), s.flags[key], "config key '" + key + "' (default " + value.dump() + ")");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      if (s.app->count("--help")) {
        out << s.app->help();
        return kExitOk;
      }
      json config = default_config(name);
      if (!s.config_path.empty()) {
        const json file = json::parse(io::read_file(s.config_path));
        if (!file.is_object()) throw UsageError("--config file must hold a JSON object");
        for (const auto& [key, value] : file.items()) {
          if (key == "command") continue;
          if (!config.contains(key)) throw UsageError("unknown config key '" + key + "' for " + name);
          if (config[key].is_object() && value.is_object()) {
            config[key].update(value);
          } else {
            config[key] = value;
          }
        }
      }
      for (const auto& [key, raw] : s.flags) {
        if (s.app->count(flag_name(key)) == 0) continue;
        json v = coerce(key, config[key], raw);
        if (config[key].is_object()) {
          if (!v.is_object()) throw UsageError(flag_name(key) + " expects a JSON object");
          config[key].update(v);
        } else {
          config[key] = v;
        }
      }
      json result;
      if (name == "gen") result = cmd_gen(config);
      else if (name == "diag") result = cmd_diag(config);
      else if (name == "fit-vf") result = cmd_fit_vf(config);
      else if (name == "fit-lyap") result = cmd_fit_lyap(config);
      else result = cmd_verify(config);
      if (name == "diag" && config["out"].get<std::string>().empty()) {
        out << result.dump(2) << "\n";
      }
      return kExitOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    if (const auto* fe = dynamic_cast<const FactorizationError*>(&e)) {
      err << "condition estimate: " << fe->condition_estimate() << "\n";
    }
    return kExitNumerical;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "usage error: malformed JSON or config value: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace kernlyap::cli
