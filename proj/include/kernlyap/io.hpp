#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kernlyap/geometry.hpp"
#include "kernlyap/lyap.hpp"
#include "kernlyap/vfield.hpp"
#include "kernlyap/wendland.hpp"

namespace kernlyap::io {

using nlohmann::json;

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Writes to `path` through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

/// Numeric CSV with a header row. Throws UsageError on malformed input.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};
CsvTable read_csv(const std::string& path);
std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& rows);

/// Samples: header x1..xd,y1..yd.
SampleSet read_samples(const std::string& path);
std::string format_samples(const SampleSet& z);
/// Points: header x1..xd (a header row is optional on input).
PointSet read_points(const std::string& path);
std::string format_points(const PointSet& points);

json to_json(const PointSet& points);
PointSet points_from_json(const json& j, int dimension);
json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

json to_json(const WendlandKernel& kernel);
WendlandKernel kernel_from_json(const json& j);

json to_json(const Region& region);
Region region_from_json(const json& j);
json to_json(const DomainSpec& domain);
/// Applies the keys present in `j` on top of `base` (X, omega, xbar, eps, gamma).
DomainSpec domain_from_json(const json& j, const DomainSpec* base = nullptr);

json to_json(const VectorFieldModel& model);
VectorFieldModel vector_field_from_json(const json& j);

json to_json(const LyapunovModel& model);
LyapunovModel lyapunov_from_json(const json& j);

}  // namespace kernlyap::io
