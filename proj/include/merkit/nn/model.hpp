#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "merkit/linalg/dense_matrix.hpp"

namespace merkit::data {
struct Dataset;
}

namespace merkit::nn {

using linalg::DenseMatrix;
using linalg::Vector;

enum class Activation { kRelu, kTanh };
/// Which parameter vector an evaluation uses: the trained one or the
/// snapshot taken at construction.
enum class At { kCurrent, kInit };
enum class OutputSpace { kLogits, kProbabilities };

const char* to_string(Activation a) noexcept;
Activation activation_from_string(const std::string& s);
const char* to_string(OutputSpace s) noexcept;
OutputSpace output_space_from_string(const std::string& s);

/// Fully connected classifier shape. Empty layer_widths gives a linear model
/// f(x) = W x (+ b).
struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> layer_widths;
  std::size_t num_classes = 2;
  Activation activation = Activation::kRelu;
  std::uint64_t init_seed = 0;
  double init_scale = 1.0;
  bool bias = true;

  void validate() const;
  std::size_t param_count() const;
  /// [input_dim, widths..., num_classes]
  std::vector<std::size_t> layer_sizes() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Offsets of one dense layer inside the flat parameter vector. Weights are
/// row-major (out x in) followed by the bias (out) when enabled.
struct LayerView {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  bool has_bias = true;
};

std::vector<LayerView> layer_views(const ModelSpec& spec);

class NeuralModel {
 public:
  /// Draws weights from N(0, (init_scale / sqrt(fan_in))^2), zero biases, and
  /// snapshots them as theta0.
  explicit NeuralModel(ModelSpec spec);
  NeuralModel(ModelSpec spec, Vector theta0, Vector theta);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t param_count() const noexcept { return theta_.size(); }
  std::size_t input_dim() const noexcept { return spec_.input_dim; }
  std::size_t num_classes() const noexcept { return spec_.num_classes; }

  std::span<const double> params() const noexcept { return theta_; }
  std::span<double> mutable_params() noexcept { return theta_; }
  std::span<const double> init_params() const noexcept { return theta0_; }
  std::span<const double> params_at(At at) const noexcept {
    return at == At::kInit ? std::span<const double>(theta0_) : std::span<const double>(theta_);
  }

  void set_params(std::span<const double> theta);
  /// theta - theta0
  Vector weight_change() const;
  /// Same spec and snapshot, parameters reset to theta0.
  NeuralModel at_init() const;

 private:
  ModelSpec spec_;
  Vector theta0_;
  Vector theta_;
};

Vector forward(const ModelSpec& spec, std::span<const double> params, std::span<const double> x);
Vector forward(const NeuralModel& model, std::span<const double> x, At at = At::kCurrent);
/// Softmax probabilities, or logits unchanged.
Vector outputs(const NeuralModel& model, std::span<const double> x, OutputSpace space,
               At at = At::kCurrent);

Vector softmax(std::span<const double> logits);
/// Ties go to the lowest index.
std::size_t argmax(std::span<const double> v);
std::size_t predict(const NeuralModel& model, std::span<const double> x);
/// Top-1 minus top-2 entry; 0 for single-entry vectors.
double top_two_gap(std::span<const double> v);
double predict_margin(const NeuralModel& model, std::span<const double> x, OutputSpace space);

/// K x p matrix; row k is d logit_k / d theta at the chosen parameters.
DenseMatrix param_jacobian(const NeuralModel& model, std::span<const double> x, At at);
/// f_{theta0}(x) + J_{theta0}(x) (theta - theta0)
Vector linearized_forward(const NeuralModel& model, std::span<const double> x);

double accuracy(const NeuralModel& model, const data::Dataset& data);

}  // namespace merkit::nn
