#include "kernlyap/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "kernlyap/errors.hpp"

namespace kernlyap::io {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open '" + tmp + "' for writing");
    out << contents;
    if (!out) throw UsageError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw UsageError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    std::vector<double> vals(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && parse_double(cells[i], vals[i]);
    if (!numeric) {
      if (rows.empty() && table.header.empty()) {
        table.header = cells;
        continue;
      }
      throw UsageError(path + ":" + std::to_string(line_no) + ": non-numeric value");
    }
    if (!rows.empty() && vals.size() != rows.front().size()) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    rows.push_back(std::move(vals));
  }
  const std::size_t cols = rows.empty() ? table.header.size() : rows.front().size();
  if (!table.header.empty() && table.header.size() != cols) {
    throw UsageError(path + ": header and data column counts differ");
  }
  table.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) table.rows(i, j) = rows[i][j];
  return table;
}

std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (c) out += ',';
      out += format_double(rows(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> axis_header(const char* prefix, Eigen::Index d) {
  std::vector<std::string> h;
  for (Eigen::Index k = 1; k <= d; ++k) h.push_back(prefix + std::to_string(k));
  return h;
}

}  // namespace

SampleSet read_samples(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.cols() < 2 || t.rows.cols() % 2 != 0) {
    throw UsageError(path + ": sample CSV needs columns x1..xd,y1..yd");
  }
  const Eigen::Index d = t.rows.cols() / 2;
  if (!t.header.empty()) {
    auto expect = axis_header("x", d);
    const auto ys = axis_header("y", d);
    expect.insert(expect.end(), ys.begin(), ys.end());
    if (t.header != expect) throw UsageError(path + ": expected header x1..xd,y1..yd");
  }
  SampleSet z;
  z.sites = t.rows.leftCols(d);
  z.values = t.rows.rightCols(d);
  return z;
}

std::string format_samples(const SampleSet& z) {
  auto header = axis_header("x", z.sites.cols());
  const auto ys = axis_header("y", z.values.cols());
  header.insert(header.end(), ys.begin(), ys.end());
  Eigen::MatrixXd rows(z.sites.rows(), z.sites.cols() + z.values.cols());
  rows << z.sites, z.values;
  return format_csv(header, rows);
}

PointSet read_points(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.cols() < 1) throw UsageError(path + ": empty point file");
  return t.rows;
}

std::string format_points(const PointSet& points) {
  return format_csv(axis_header("x", points.cols()), points);
}

json to_json(const PointSet& points) {
  json out = json::array();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < points.cols(); ++k) row.push_back(points(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

PointSet points_from_json(const json& j, int dimension) {
  if (!j.is_array()) throw UsageError("expected an array of points");
  PointSet out(static_cast<Eigen::Index>(j.size()), dimension);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != static_cast<std::size_t>(dimension)) {
      throw UsageError("point " + std::to_string(i) + " has the wrong dimension");
    }
    for (int k = 0; k < dimension; ++k) out(i, k) = j[i][k].get<double>();
  }
  return out;
}

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json(const WendlandKernel& kernel) {
  return {{"d", kernel.dimension()}, {"k", kernel.smoothness()}, {"c", kernel.scale()}};
}

WendlandKernel kernel_from_json(const json& j) {
  return WendlandKernel(j.at("d").get<int>(), j.at("k").get<int>(), j.at("c").get<double>());
}

json to_json(const Region& region) {
  if (const auto* box = std::get_if<Box>(&region)) {
    return {{"type", "box"}, {"lower", to_json(box->lower)}, {"upper", to_json(box->upper)}};
  }
  const auto& ball = std::get<Ball>(region);
  return {{"type", "ball"}, {"center", to_json(ball.center)}, {"radius", ball.radius}};
}

Region region_from_json(const json& j) {
  const std::string type = j.value("type", j.contains("radius") ? "ball" : "box");
  if (type == "box") {
    Box b{vector_from_json(j.at("lower")), vector_from_json(j.at("upper"))};
    if (b.lower.size() != b.upper.size()) throw UsageError("box: lower/upper size mismatch");
    return b;
  }
  if (type == "ball") return Ball{vector_from_json(j.at("center")), j.at("radius").get<double>()};
  throw UsageError("unknown region type '" + type + "'");
}

json to_json(const DomainSpec& domain) {
  json out;
  out["X"] = {{"lower", to_json(domain.ambient.lower)}, {"upper", to_json(domain.ambient.upper)}};
  out["omega"] = to_json(domain.omega);
  out["xbar"] = domain.xbar ? to_json(*domain.xbar) : json(nullptr);
  out["eps"] = domain.eps;
  out["gamma"] = domain.gamma ? json{{"center", to_json(domain.gamma->center)},
                                     {"radius", domain.gamma->radius}}
                              : json(nullptr);
  return out;
}

DomainSpec domain_from_json(const json& j, const DomainSpec* base) {
  DomainSpec d;
  if (base) d = *base;
  bool has_x = base != nullptr;
  bool has_omega = base != nullptr;
  if (j.contains("X")) {
    d.ambient = std::get<Box>(region_from_json(json{{"type", "box"},
                                                   {"lower", j["X"].at("lower")},
                                                   {"upper", j["X"].at("upper")}}));
    has_x = true;
  }
  if (j.contains("omega")) {
    d.omega = region_from_json(j["omega"]);
    has_omega = true;
  }
  if (!has_x) throw UsageError("domain: missing ambient box X");
  if (!has_omega) d.omega = d.ambient;
  if (j.contains("xbar")) {
    d.xbar = j["xbar"].is_null() ? std::nullopt : std::optional<Point>(vector_from_json(j["xbar"]));
  }
  if (j.contains("eps")) d.eps = j["eps"].get<double>();
  if (j.contains("gamma")) {
    if (j["gamma"].is_null()) {
      d.gamma.reset();
    } else {
      d.gamma = Sphere{vector_from_json(j["gamma"].at("center")), j["gamma"].at("radius").get<double>()};
    }
  }
  d.validate();
  return d;
}

json to_json(const VectorFieldModel& model) {
  json coeffs = json::array();
  for (Eigen::Index k = 0; k < model.coeffs().cols(); ++k) {
    coeffs.push_back(to_json(Eigen::VectorXd(model.coeffs().col(k))));
  }
  const FitProvenance& p = model.provenance();
  return {{"kernel", to_json(model.kernel())},
          {"centers", to_json(model.centers())},
          {"coeffs", std::move(coeffs)},
          {"lambda", model.lambda()},
          {"provenance",
           {{"w_norm", p.w_norm},
            {"h_x", p.h_x},
            {"r", p.r},
            {"delta", p.delta},
            {"seed", p.seed},
            {"solver", to_string(p.solver)},
            {"dataset_hash", p.dataset_hash},
            {"normal_residual", p.normal_residual},
            {"condition_estimate", p.condition_estimate}}}};
}

VectorFieldModel vector_field_from_json(const json& j) {
  WendlandKernel kernel = kernel_from_json(j.at("kernel"));
  const int d = kernel.dimension();
  PointSet centers = points_from_json(j.at("centers"), d);
  const json& jc = j.at("coeffs");
  if (!jc.is_array() || jc.size() != static_cast<std::size_t>(d)) {
    throw UsageError("vector field model: need one coefficient vector per component");
  }
  Eigen::MatrixXd coeffs(centers.rows(), d);
  for (int k = 0; k < d; ++k) {
    const Eigen::VectorXd col = vector_from_json(jc[k]);
    if (col.size() != centers.rows()) throw UsageError("vector field model: coefficient length");
    coeffs.col(k) = col;
  }
  FitProvenance prov;
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    prov.w_norm = p.value("w_norm", 0.0);
    prov.h_x = p.value("h_x", 0.0);
    prov.r = p.value("r", 1.0);
    prov.delta = p.value("delta", 0.05);
    prov.seed = p.value("seed", std::uint64_t{0});
    prov.solver = solve_form_from_string(p.value("solver", std::string("weighted_lu")));
    prov.dataset_hash = p.value("dataset_hash", std::string());
    prov.normal_residual = p.value("normal_residual", 0.0);
    prov.condition_estimate = p.value("condition_estimate", 0.0);
  }
  return VectorFieldModel(std::move(kernel), std::move(centers), std::move(coeffs),
                          j.at("lambda").get<double>(), std::move(prov));
}

json to_json(const LyapunovModel& model) {
  json out;
  out["mode"] = to_string(model.mode());
  out["kernel"] = to_json(model.kernel());
  out["points"] = to_json(model.collocation().points);
  out["field_values"] = to_json(model.collocation().field);
  out["gamma_points"] = to_json(model.gamma_points());
  out["coeffs"] = to_json(model.coeffs());
  out["rhs"] = to_json(model.rhs());
  if (model.mode() == LyapunovMode::V) {
    json q = json::array();
    for (Eigen::Index i = 0; i < model.pfun.q.rows(); ++i) {
      q.push_back(to_json(Eigen::VectorXd(model.pfun.q.row(i).transpose())));
    }
    out["pfun"] = {{"form", "quadratic"}, {"xbar", to_json(model.pfun.xbar)}, {"Q", std::move(q)}};
  } else {
    out["cbar"] = model.cbar;
    out["xiT"] = to_json(model.xi_values);
  }
  const LyapunovProvenance& p = model.provenance;
  out["provenance"] = {{"jitter_applied", p.jitter_applied},
                       {"jitter", p.jitter},
                       {"condition_estimate", p.condition_estimate},
                       {"max_collocation_residual", p.max_collocation_residual}};
  return out;
}

LyapunovModel lyapunov_from_json(const json& j) {
  const LyapunovMode mode = lyapunov_mode_from_string(j.at("mode").get<std::string>());
  WendlandKernel kernel = kernel_from_json(j.at("kernel"));
  const int d = kernel.dimension();
  Collocation c{points_from_json(j.at("points"), d), points_from_json(j.at("field_values"), d)};
  if (c.points.rows() != c.field.rows()) throw UsageError("Lyapunov model: points/field mismatch");
  PointSet gamma = points_from_json(j.value("gamma_points", json::array()), d);
  LyapunovModel model(mode, std::move(kernel), std::move(c), std::move(gamma),
                      vector_from_json(j.at("coeffs")), vector_from_json(j.at("rhs")));
  if (mode == LyapunovMode::V) {
    const json& pf = j.at("pfun");
    Eigen::MatrixXd q(d, d);
    for (int r = 0; r < d; ++r) q.row(r) = vector_from_json(pf.at("Q").at(r)).transpose();
    model.pfun = PFunction{vector_from_json(pf.at("xbar")), q};
  } else {
    model.cbar = j.at("cbar").get<double>();
    model.xi_values = vector_from_json(j.at("xiT"));
  }
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    model.provenance.jitter_applied = p.value("jitter_applied", false);
    model.provenance.jitter = p.value("jitter", 0.0);
    model.provenance.condition_estimate = p.value("condition_estimate", 0.0);
    model.provenance.max_collocation_residual = p.value("max_collocation_residual", 0.0);
  }
  return model;
}

}  // namespace kernlyap::io
