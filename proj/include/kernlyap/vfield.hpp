#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "kernlyap/geometry.hpp"
#include "kernlyap/kernels.hpp"
#include "kernlyap/types.hpp"
#include "kernlyap/wendland.hpp"

namespace kernlyap {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Noisy samples z = (x_i, y_i) of the unknown field, y_i = f*(x_i) + eta_i,
/// together with the Voronoi quadrature weights and fill distance of the
/// sites in the ambient box.
struct SampleSet {
  PointSet sites;
  PointSet values;
  Eigen::VectorXd weights;
  double fill_distance = 0.0;
  /// Declared noise standard-deviation bound (informational).
  double sigma = 0.0;

  int dimension() const { return static_cast<int>(sites.cols()); }
  Eigen::Index size() const { return sites.rows(); }
  double weight_norm() const { return weights.norm(); }
  bool has_design() const { return weights.size() == sites.rows() && fill_distance > 0.0; }
};

struct DesignOptions {
  std::int64_t mc_samples_per_site = 100;
  std::int64_t min_mc_samples = 20000;
  std::int64_t fill_candidates = 40000;
  std::uint64_t seed = 0;
};

/// Fills in Voronoi weights and the fill distance of the sites in `ambient`.
void attach_design(SampleSet& z, const Box& ambient, const DesignOptions& options = {});

/// lambda = (max{||w||, h_x^{2/(3-2r)}})^{2/(2r+1)}. delta is validated but
/// does not enter the formula. Throws UsageError for r outside (1/2, 1],
/// non-positive ||w|| or h_x, or delta outside (0, 1).
double choose_lambda(double w_norm, double h_x, double r = 1.0, double delta = 0.05);

enum class SolveForm {
  /// (D_w A + lambda I) a = D_w y, partial-pivoting LU.
  weighted_lu,
  /// (A D_w A + lambda A) a = A D_w y, Cholesky.
  normal_cholesky,
};

std::string to_string(SolveForm form);
SolveForm solve_form_from_string(const std::string& name);

struct FitProvenance {
  double w_norm = 0.0;
  double h_x = 0.0;
  double r = 1.0;
  double delta = 0.05;
  std::uint64_t seed = 0;
  SolveForm solver = SolveForm::weighted_lu;
  std::string dataset_hash;
  /// max_k ||(A D A + lambda A) a_k - A D y_k|| / ||A D y_k||.
  double normal_residual = 0.0;
  double condition_estimate = 0.0;
};

/// f^k(x) = sum_i coeffs(i, k) K(x, x_i), one column per component.
class VectorFieldModel {
 public:
  VectorFieldModel(WendlandKernel kernel, PointSet centers, Eigen::MatrixXd coeffs, double lambda,
                   FitProvenance provenance = {});

  const WendlandKernel& kernel() const noexcept { return kernel_; }
  const PointSet& centers() const noexcept { return centers_; }
  const Eigen::MatrixXd& coeffs() const noexcept { return coeffs_; }
  double lambda() const noexcept { return lambda_; }
  const FitProvenance& provenance() const noexcept { return provenance_; }
  int dimension() const noexcept { return kernel_.dimension(); }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  /// One evaluated vector per row.
  PointSet evaluate(const PointSet& points, Execution exec = Execution::parallel) const;
  VectorField as_field() const;

 private:
  WendlandKernel kernel_;
  PointSet centers_;
  Eigen::MatrixXd coeffs_;
  double lambda_;
  FitProvenance provenance_;
};

inline Eigen::VectorXd eval_vf(const VectorFieldModel& model, const Eigen::VectorXd& x) {
  return model(x);
}

struct FitOptions {
  SolveForm solver = SolveForm::weighted_lu;
  double r = 1.0;
  double delta = 0.05;
  std::uint64_t seed = 0;
};

/// Weighted regularized least squares in the RKHS of `kernel`, one solve per
/// component against a shared factorization. Requires attach_design() to
/// have run. Throws UsageError for bad inputs, DuplicateSiteError, or
/// FactorizationError when the system is numerically singular.
VectorFieldModel fit_vector_field(const SampleSet& z, const WendlandKernel& kernel, double lambda,
                                  const FitOptions& options = {});

/// Same pipeline on noise-free values y_i = fstar(x_i) over the design of `z`
/// (its sites, weights and fill distance; its values are ignored).
VectorFieldModel fit_noise_free(const SampleSet& z, const VectorField& fstar,
                                const WendlandKernel& kernel, double lambda,
                                const FitOptions& options = {});

/// sum_i w_i ||f(x_i) - y_i||^2 + lambda sum_k ||f^k||_K^2 for a fitted model
/// whose centers are the sites of z.
double regularized_objective(const VectorFieldModel& model, const SampleSet& z);

/// FNV-1a over the raw bytes of sites and values.
std::string dataset_hash(const SampleSet& z);

}  // namespace kernlyap
