#include "merkit/extraction/kernel_extract.hpp"

#include <numeric>

#include "merkit/error.hpp"
#include "merkit/linalg/decompositions.hpp"
#include "merkit/parallel.hpp"

namespace merkit::extraction {

Vector output_change(const NeuralModel& victim, const DenseMatrix& samples,
                     nn::OutputSpace space) {
  const std::size_t k = victim.num_classes();
  Vector out(samples.rows() * k);
  parallel_for(samples.rows(), [&](std::size_t i) {
    const Vector now = nn::outputs(victim, samples.row(i), space, nn::At::kCurrent);
    const Vector then = nn::outputs(victim, samples.row(i), space, nn::At::kInit);
    for (std::size_t a = 0; a < k; ++a) out[i * k + a] = now[a] - then[a];
  });
  return out;
}

KernelSolution kernel_extract(const NeuralModel& victim, const DenseMatrix& queries,
                              double ridge_lambda, std::vector<std::size_t> queried_ids) {
  if (!(ridge_lambda >= 0.0)) throw ParameterError("ridge_lambda must be non-negative");
  const DenseMatrix g = ntk::stacked_jacobian(victim, queries, nn::At::kInit);
  const DenseMatrix theta = linalg::gram(g);
  const std::size_t n = queries.rows();
  DenseMatrix reg = theta;
  const double shift = static_cast<double>(n) * ridge_lambda;
  for (std::size_t i = 0; i < reg.rows(); ++i) reg(i, i) += shift;

  KernelSolution sol;
  sol.ridge_lambda = ridge_lambda;
  sol.target = output_change(victim, queries, nn::OutputSpace::kLogits);
  try {
    sol.alpha = linalg::solve_spd(reg, sol.target);
  } catch (const SingularityError& e) {
    throw SingularityError(std::string(e.what()) +
                               "; use ridge_lambda > 0 or clip the kernel eigenvalues",
                           e.min_eigenvalue());
  }
  sol.fitted = linalg::matvec(theta, sol.alpha);
  sol.rkhs_norm_sq = linalg::dot(sol.alpha, sol.fitted);
  sol.weight_delta = linalg::matvec_transposed(g, sol.alpha);
  if (queried_ids.empty()) {
    queried_ids.resize(n);
    std::iota(queried_ids.begin(), queried_ids.end(), std::size_t{0});
  }
  sol.queried_ids = std::move(queried_ids);
  return sol;
}

Vector kernel_predict(const KernelSolution& sol, const NeuralModel& model,
                      std::span<const double> x) {
  if (sol.weight_delta.size() != model.param_count()) {
    throw DimensionError("kernel solution does not belong to this model");
  }
  Vector out = nn::forward(model, x, nn::At::kInit);
  const DenseMatrix j = nn::param_jacobian(model, x, nn::At::kInit);
  const Vector change = linalg::matvec(j, sol.weight_delta);
  for (std::size_t a = 0; a < out.size(); ++a) out[a] += change[a];
  return out;
}

DenseMatrix projection_matrix(const NeuralModel& model, const DenseMatrix& queries, nn::At at) {
  const std::size_t p = model.param_count();
  if (p > kMaxProjectionParams) {
    throw CapacityError("model has " + std::to_string(p) + " parameters; projection_matrix is "
                        "limited to " + std::to_string(kMaxProjectionParams) +
                        ", use kernel_extract or project_weight_change instead");
  }
  const DenseMatrix g = ntk::stacked_jacobian(model, queries, at);
  const linalg::Cholesky chol(linalg::gram(g));
  // X = Theta^-1 G, solved one parameter column at a time.
  const std::size_t m = g.rows();
  DenseMatrix x_t(p, m);
  parallel_for(p, [&](std::size_t c) {
    Vector col(m);
    for (std::size_t r = 0; r < m; ++r) col[r] = g(r, c);
    const Vector sol = chol.solve(col);
    std::copy(sol.begin(), sol.end(), x_t.row(c).begin());
  });
  const DenseMatrix g_t = linalg::transpose(g);
  DenseMatrix proj(p, p);
  parallel_for(p, [&](std::size_t i) {
    for (std::size_t j = i; j < p; ++j) proj(i, j) = linalg::dot(g_t.row(i), x_t.row(j));
  });
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) proj(j, i) = proj(i, j);
  }
  return proj;
}

Vector project_weight_change(const NeuralModel& victim, const DenseMatrix& queries, nn::At at) {
  const DenseMatrix g = ntk::stacked_jacobian(victim, queries, at);
  const Vector dtheta = victim.weight_change();
  const Vector gd = linalg::matvec(g, dtheta);
  const Vector coeff = linalg::solve_spd(linalg::gram(g), gd);
  return linalg::matvec_transposed(g, coeff);
}

}  // namespace merkit::extraction
