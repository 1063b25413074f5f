#pragma once

#include <cstdint>
#include <vector>

#include "merkit/inspector/pairs.hpp"
#include "merkit/nn/model.hpp"

namespace merkit::inspector {

struct ComparatorConfig {
  std::vector<std::size_t> hidden{64, 64, 32};
  std::size_t epochs = 500;
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  /// Weight std is init_scale / sqrt(fan_in); 1/sqrt(3) matches the usual
  /// uniform(+-1/sqrt(fan_in)) dense-layer default.
  double init_scale = 0.57735026918962576;
  std::uint64_t seed = 0;
};

/// z-score standardizer plus a two-logit classifier; the softmax of the two
/// logits is the logistic output for label 1.
class Comparator {
 public:
  Comparator(nn::NeuralModel model, Vector mean, Vector scale);

  /// P(label = 1) for one raw feature vector.
  double probability(std::span<const double> features) const;
  int predict(std::span<const double> features) const;
  const nn::NeuralModel& model() const noexcept { return model_; }
  const Vector& mean() const noexcept { return mean_; }
  const Vector& scale() const noexcept { return scale_; }

 private:
  Vector standardize(std::span<const double> features) const;

  nn::NeuralModel model_;
  Vector mean_;
  Vector scale_;
};

/// Throws DataError on an empty or single-class training set. epochs = 0
/// returns the untrained network.
Comparator train_comparator(const std::vector<PairExample>& train, const ComparatorConfig& cfg);

/// Fraction of examples whose label is predicted at threshold 0.5.
double cacc(const Comparator& model, const std::vector<PairExample>& test);

}  // namespace merkit::inspector
