#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "merkit/nn/model.hpp"

namespace merkit::nn {

enum class Optimizer { kSgd, kAdam };
enum class Loss { kCrossEntropy, kMse };

const char* to_string(Optimizer o) noexcept;
const char* to_string(Loss l) noexcept;
Optimizer optimizer_from_string(const std::string& s);
Loss loss_from_string(const std::string& s);

/// PGD inner loop: `steps` signed-gradient ascent steps of size step_size,
/// projected onto the L-infinity ball of radius epsilon around the input.
struct AdversarialConfig {
  double epsilon = 0.1;
  double step_size = 0.01;
  std::size_t steps = 3;

  friend bool operator==(const AdversarialConfig&, const AdversarialConfig&) = default;
};

struct TrainConfig {
  Optimizer optimizer = Optimizer::kSgd;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double momentum = 0.0;
  double weight_decay = 0.0;
  Loss loss = Loss::kCrossEntropy;
  std::uint64_t seed = 0;
  std::optional<AdversarialConfig> adversarial;

  void validate() const;
  /// Stable key=value rendering used for digests.
  std::string canonical() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainReport {
  /// Mean training loss per epoch, summed in sample-index order.
  Vector loss_curve;
  /// Agreement of argmax predictions with argmax targets after training.
  double final_accuracy = 0.0;
};

using EpochCallback = std::function<void(std::size_t epoch, const NeuralModel& model)>;

TrainReport train(NeuralModel& model, const data::Dataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Trains against per-sample target rows (probability vectors for
/// cross-entropy, regression targets for MSE).
TrainReport train_soft(NeuralModel& model, const DenseMatrix& inputs, const DenseMatrix& targets,
                       const TrainConfig& cfg, const EpochCallback& on_epoch = {});

DenseMatrix one_hot(std::span<const int> labels, std::size_t num_classes);

struct LossGradient {
  double loss = 0.0;
  Vector gradient;
};

/// Mean loss over the rows and its gradient w.r.t. the current parameters.
LossGradient loss_and_gradient(const NeuralModel& model, const DenseMatrix& inputs,
                               const DenseMatrix& targets, Loss loss);

/// Gradient of the single-sample loss w.r.t. the input.
Vector input_gradient(const NeuralModel& model, std::span<const double> x,
                      std::span<const double> target, Loss loss);

/// L-infinity PGD starting from the clean input; returns x + delta with
/// |delta|_inf <= epsilon.
Vector pgd_perturb(const NeuralModel& model, std::span<const double> x,
                   std::span<const double> target, const AdversarialConfig& cfg, Loss loss);

}  // namespace merkit::nn
