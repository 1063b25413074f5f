#pragma once

#include <optional>
#include <string>
#include <vector>

#include "merkit/nn/model.hpp"

namespace merkit::ntk {

using linalg::DenseMatrix;
using linalg::Vector;
using nn::At;
using nn::NeuralModel;

/// "init" or "trained"; At::kCurrent is the trained point.
const char* eval_point_name(At at) noexcept;
At eval_point_from_string(const std::string& s);

/// Empirical kernel over a sample set, NK x NK with sample-major ordering
/// (row i*K + a is class a of sample i).
struct NtkMatrix {
  /// Clipped when clip_q is set.
  DenseMatrix theta;
  std::size_t n = 0;
  std::size_t k = 0;
  At eval_point = At::kCurrent;
  std::optional<double> clip_q;
  std::vector<std::size_t> sample_ids;
  /// Trace before clipping.
  double raw_trace = 0.0;
};

/// K x K block of Jacobian row products between x and x2.
DenseMatrix kernel_block(const NeuralModel& model, std::span<const double> x,
                         std::span<const double> x2, At at);

/// (NK) x p matrix of logit Jacobians, one K-row block per sample row.
DenseMatrix stacked_jacobian(const NeuralModel& model, const DenseMatrix& samples, At at);

/// Theta = G G^T, optionally eigenvalue-clipped at clip_q. sample_ids defaults
/// to 0..N-1.
NtkMatrix assemble(const NeuralModel& model, const DenseMatrix& samples, At at,
                   std::optional<double> clip_q = std::nullopt,
                   std::vector<std::size_t> sample_ids = {});
/// Same, reusing an already stacked Jacobian.
NtkMatrix assemble_from_jacobian(const DenseMatrix& g, std::size_t k, At at,
                                 std::optional<double> clip_q = std::nullopt,
                                 std::vector<std::size_t> sample_ids = {});

/// Unclipped trace.
double trace(const NtkMatrix& ntk);
/// Largest eigenvalue of k(x, x) over the samples.
double kappa(const NeuralModel& model, const DenseMatrix& samples, At at);

/// 16-byte header (8-byte magic, u32 n, u32 K) then row-major little-endian doubles.
void dump_theta(const NtkMatrix& ntk, const std::string& path);
/// Reads a dump back; metadata other than n and K is left at defaults.
NtkMatrix load_theta(const std::string& path);

}  // namespace merkit::ntk
