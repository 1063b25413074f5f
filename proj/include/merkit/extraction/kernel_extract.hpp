#pragma once

#include <optional>
#include <vector>

#include "merkit/ntk/ntk.hpp"

namespace merkit::extraction {

using linalg::DenseMatrix;
using linalg::Vector;
using nn::NeuralModel;

/// Ridge solution of the squared-loss kernel problem over NK stacked outputs.
struct KernelSolution {
  Vector alpha;
  double ridge_lambda = 0.0;
  /// alpha^T Theta alpha
  double rkhs_norm_sq = 0.0;
  std::vector<std::size_t> queried_ids;
  /// G^T alpha: the implied parameter change of the linearized surrogate.
  Vector weight_delta;
  /// Victim logit change on the queries, sample-major.
  Vector target;
  /// Theta alpha on the queries.
  Vector fitted;
};

/// Victim output change out_theta(x) - out_theta0(x), stacked sample-major.
Vector output_change(const NeuralModel& victim, const DenseMatrix& samples,
                     nn::OutputSpace space);

/// alpha = (Theta + N lambda I)^-1 (f_v - f_0) with Theta built at the shared
/// init over the query rows. lambda = 0 on a rank-deficient kernel raises a
/// SingularityError.
KernelSolution kernel_extract(const NeuralModel& victim, const DenseMatrix& queries,
                              double ridge_lambda, std::vector<std::size_t> queried_ids = {});

/// f_theta0(x) + J_theta0(x) G^T alpha.
Vector kernel_predict(const KernelSolution& sol, const NeuralModel& model,
                      std::span<const double> x);

/// Largest p for which projection_matrix materializes P.
inline constexpr std::size_t kMaxProjectionParams = 3000;

/// P = G^T Theta^-1 G (p x p). Throws CapacityError above kMaxProjectionParams.
DenseMatrix projection_matrix(const NeuralModel& model, const DenseMatrix& queries,
                              nn::At at = nn::At::kInit);
/// P (theta_v - theta0) without forming P.
Vector project_weight_change(const NeuralModel& victim, const DenseMatrix& queries,
                             nn::At at = nn::At::kInit);

}  // namespace merkit::extraction
