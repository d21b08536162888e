#pragma once

#include <Eigen/Core>

namespace kernlyap {

/// One point per row. Row-major so that a row is a contiguous vector.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

/// Sites closer than this are treated as the same point.
inline constexpr double kDuplicateTolerance = 1e-12;

}  // namespace kernlyap
