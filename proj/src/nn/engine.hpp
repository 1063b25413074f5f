#pragma once

// Shared forward/backward machinery for single samples and mini-batches.

#include <cmath>
#include <span>
#include <vector>

#include "merkit/nn/model.hpp"
#include "merkit/nn/train.hpp"

namespace merkit::nn::detail {

inline double activate(Activation a, double z) noexcept {
  return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

/// Derivative from the pre-activation and its activated value.
inline double activation_slope(Activation a, double pre, double post) noexcept {
  return a == Activation::kRelu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

/// post[0] is the input; pre[l] is layer l before activation; the logits are
/// pre.back(), and post[l + 1] = act(pre[l]) for hidden layers.
struct BatchTrace {
  std::vector<DenseMatrix> pre;
  std::vector<DenseMatrix> post;

  const DenseMatrix& logits() const { return pre.back(); }
};

void forward_batch(const ModelSpec& spec, const std::vector<LayerView>& views,
                   std::span<const double> params, const DenseMatrix& inputs, BatchTrace& trace);

/// Accumulates dL/dtheta into grad given dL/dlogits (overwritten). When
/// input_grad is non-null it receives dL/dx (B x d).
void backward_batch(const ModelSpec& spec, const std::vector<LayerView>& views,
                    std::span<const double> params, const BatchTrace& trace, DenseMatrix& dlogits,
                    std::span<double> grad, DenseMatrix* input_grad);

/// Writes per-row loss values and dL/dlogits for the given targets, scaled by
/// `scale` (typically 1/B).
void loss_rows(Loss loss, const DenseMatrix& logits, const DenseMatrix& targets, double scale,
               std::span<double> row_loss, DenseMatrix& dlogits);

}  // namespace merkit::nn::detail
