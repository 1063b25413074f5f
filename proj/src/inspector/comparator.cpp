#include "merkit/inspector/comparator.hpp"

#include <cmath>

#include "merkit/error.hpp"
#include "merkit/nn/train.hpp"

namespace merkit::inspector {

Comparator::Comparator(nn::NeuralModel model, Vector mean, Vector scale)
    : model_(std::move(model)), mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != model_.input_dim() || scale_.size() != model_.input_dim()) {
    throw DimensionError("standardizer does not match the comparator input width");
  }
}

Vector Comparator::standardize(std::span<const double> features) const {
  if (features.size() != mean_.size()) {
    throw DimensionError("comparator expects " + std::to_string(mean_.size()) +
                         " features, got " + std::to_string(features.size()));
  }
  Vector z(features.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (features[i] - mean_[i]) / scale_[i];
  return z;
}

double Comparator::probability(std::span<const double> features) const {
  return nn::softmax(nn::forward(model_, standardize(features)))[1];
}

int Comparator::predict(std::span<const double> features) const {
  return probability(features) > 0.5 ? 1 : 0;
}

Comparator train_comparator(const std::vector<PairExample>& train, const ComparatorConfig& cfg) {
  if (train.empty()) throw DataError("comparator training set is empty");
  const std::size_t d = train.front().features.size();
  std::size_t ones = 0;
  for (const auto& p : train) {
    if (p.features.size() != d) throw DimensionError("pair examples have mixed feature widths");
    ones += p.label == 1;
  }
  if (ones == 0 || ones == train.size()) {
    throw DataError("comparator training set contains a single class");
  }

  const double n = static_cast<double>(train.size());
  Vector mean(d, 0.0);
  Vector scale(d, 0.0);
  for (const auto& p : train) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += p.features[j] / n;
  }
  for (const auto& p : train) {
    for (std::size_t j = 0; j < d; ++j) {
      const double r = p.features[j] - mean[j];
      scale[j] += r * r / n;
    }
  }
  for (double& s : scale) s = s > 0.0 ? std::sqrt(s) : 1.0;

  nn::ModelSpec spec;
  spec.input_dim = d;
  spec.layer_widths = cfg.hidden;
  spec.num_classes = 2;
  spec.activation = nn::Activation::kRelu;
  spec.init_seed = cfg.seed;
  spec.init_scale = cfg.init_scale;
  Comparator out(nn::NeuralModel(spec), mean, scale);
  if (cfg.epochs == 0) return out;

  DenseMatrix x(train.size(), d);
  std::vector<int> labels(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = (train[i].features[j] - mean[j]) / scale[j];
    labels[i] = train[i].label;
  }
  nn::TrainConfig tc;
  tc.optimizer = nn::Optimizer::kAdam;
  tc.learning_rate = cfg.learning_rate;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.loss = nn::Loss::kCrossEntropy;
  tc.seed = cfg.seed;
  nn::NeuralModel model(spec);
  nn::train_soft(model, x, nn::one_hot(labels, 2), tc);
  return Comparator(std::move(model), std::move(mean), std::move(scale));
}

double cacc(const Comparator& model, const std::vector<PairExample>& test) {
  if (test.empty()) throw DataError("comparator test set is empty");
  std::size_t hits = 0;
  for (const auto& p : test) hits += model.predict(p.features) == p.label;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace merkit::inspector
