#pragma once

// Data-parallel inner loops of the pipeline. Every kernel has a plain serial
// reference implementation and an OpenMP implementation; the pipeline uses
// Execution::parallel, tests check the two agree.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kernlyap/types.hpp"
#include "kernlyap/wendland.hpp"

namespace kernlyap {

enum class Execution { serial, parallel };

namespace kernels {

/// Number of samples whose nearest site (lowest index on ties) is site i.
std::vector<std::int64_t> nearest_site_counts(const PointSet& sites, const PointSet& samples,
                                              Execution exec = Execution::parallel);

/// max_j min_i ||sites_i - candidates_j||.
double max_nearest_distance(const PointSet& sites, const PointSet& candidates,
                            Execution exec = Execution::parallel);

/// (G)_{ij} = K(a_i, b_j).
Eigen::MatrixXd gram_matrix(const WendlandKernel& kernel, const PointSet& a, const PointSet& b,
                            Execution exec = Execution::parallel);

/// Row j holds sum_i coeffs(i, :) K(points_j, centers_i).
Eigen::MatrixXd expansion_values(const WendlandKernel& kernel, const PointSet& centers,
                                 const Eigen::MatrixXd& coeffs, const PointSet& points,
                                 Execution exec = Execution::parallel);

/// Orbital-derivative collocation block
/// (B)_{ij} = -psi2(r) <q_i - q_j, v_i><q_i - q_j, v_j> - psi1(r) <v_i, v_j>.
Eigen::MatrixXd orbital_matrix(const WendlandKernel& kernel, const PointSet& q,
                               const PointSet& v, Execution exec = Execution::parallel);

/// Mixed block (D)_{ij} = <grad_x K(q_i, p_j), v_i> = psi1(r) <q_i - p_j, v_i>.
Eigen::MatrixXd orbital_point_matrix(const WendlandKernel& kernel, const PointSet& q,
                                     const PointSet& v, const PointSet& p,
                                     Execution exec = Execution::parallel);

struct ExpansionField {
  Eigen::VectorXd value;
  PointSet gradient;
};

/// Generalized-interpolant expansion
///   s(x) = sum_i a_i (-psi1(||x - q_i||) <x - q_i, v_i>) + sum_j b_j K(x, p_j)
/// and its gradient at each row of `points`.
ExpansionField orbital_expansion(const WendlandKernel& kernel, const PointSet& q,
                                 const PointSet& v, const Eigen::VectorXd& orbital_coeffs,
                                 const PointSet& p, const Eigen::VectorXd& point_coeffs,
                                 const PointSet& points, Execution exec = Execution::parallel);

}  // namespace kernels
}  // namespace kernlyap
