#include "merkit/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "engine.hpp"
#include "merkit/data/dataset.hpp"
#include "merkit/error.hpp"
#include "merkit/simd/kernels.hpp"

namespace merkit::nn {

const char* to_string(Activation a) noexcept { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw ParameterError("unknown activation '" + s + "' (expected relu or tanh)");
}

const char* to_string(OutputSpace s) noexcept {
  return s == OutputSpace::kLogits ? "logits" : "probabilities";
}

OutputSpace output_space_from_string(const std::string& s) {
  if (s == "logits") return OutputSpace::kLogits;
  if (s == "probabilities") return OutputSpace::kProbabilities;
  throw ParameterError("unknown output space '" + s + "' (expected logits or probabilities)");
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw ParameterError("model input_dim must be >= 1");
  if (num_classes < 2) throw ParameterError("model needs at least 2 classes");
  for (std::size_t w : layer_widths) {
    if (w == 0) throw ParameterError("layer widths must be >= 1");
  }
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw ParameterError("init_scale must be positive");
  }
}

std::vector<std::size_t> ModelSpec::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(layer_widths.size() + 2);
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), layer_widths.begin(), layer_widths.end());
  sizes.push_back(num_classes);
  return sizes;
}

std::vector<LayerView> layer_views(const ModelSpec& spec) {
  const auto sizes = spec.layer_sizes();
  std::vector<LayerView> views;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    LayerView v;
    v.in = sizes[l];
    v.out = sizes[l + 1];
    v.weight_offset = offset;
    offset += v.in * v.out;
    v.has_bias = spec.bias;
    v.bias_offset = offset;
    if (spec.bias) offset += v.out;
    views.push_back(v);
  }
  return views;
}

std::size_t ModelSpec::param_count() const {
  const auto views = layer_views(*this);
  const auto& last = views.back();
  return last.bias_offset + (last.has_bias ? last.out : 0);
}

NeuralModel::NeuralModel(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  theta_.assign(spec_.param_count(), 0.0);
  std::mt19937_64 rng(spec_.init_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& v : layer_views(spec_)) {
    const double sd = spec_.init_scale / std::sqrt(static_cast<double>(v.in));
    for (std::size_t i = 0; i < v.in * v.out; ++i) theta_[v.weight_offset + i] = sd * normal(rng);
  }
  theta0_ = theta_;
}

NeuralModel::NeuralModel(ModelSpec spec, Vector theta0, Vector theta)
    : spec_(std::move(spec)), theta0_(std::move(theta0)), theta_(std::move(theta)) {
  spec_.validate();
  const std::size_t p = spec_.param_count();
  if (theta0_.size() != p || theta_.size() != p) {
    throw DimensionError("parameter vectors have length " + std::to_string(theta0_.size()) + "/" +
                         std::to_string(theta_.size()) + ", spec requires " + std::to_string(p));
  }
}

void NeuralModel::set_params(std::span<const double> theta) {
  if (theta.size() != theta_.size()) {
    throw DimensionError("set_params: expected " + std::to_string(theta_.size()) +
                         " parameters, got " + std::to_string(theta.size()));
  }
  std::copy(theta.begin(), theta.end(), theta_.begin());
}

Vector NeuralModel::weight_change() const {
  Vector d(theta_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = theta_[i] - theta0_[i];
  return d;
}

NeuralModel NeuralModel::at_init() const { return NeuralModel(spec_, theta0_, theta0_); }

namespace {

void check_input(const ModelSpec& spec, std::span<const double> x) {
  if (x.size() != spec.input_dim) {
    throw DimensionError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(spec.input_dim));
  }
}

DenseMatrix as_row(std::span<const double> x) {
  DenseMatrix m(1, x.size());
  std::copy(x.begin(), x.end(), m.row(0).begin());
  return m;
}

}  // namespace

Vector forward(const ModelSpec& spec, std::span<const double> params, std::span<const double> x) {
  check_input(spec, x);
  const auto views = layer_views(spec);
  Vector h(x.begin(), x.end());
  for (std::size_t l = 0; l < views.size(); ++l) {
    const auto& v = views[l];
    Vector z(v.out);
    for (std::size_t o = 0; o < v.out; ++o) {
      z[o] = simd::dot(params.subspan(v.weight_offset + o * v.in, v.in), h);
      if (v.has_bias) z[o] += params[v.bias_offset + o];
    }
    if (l + 1 < views.size()) {
      for (double& zi : z) zi = detail::activate(spec.activation, zi);
    }
    h = std::move(z);
  }
  return h;
}

Vector forward(const NeuralModel& model, std::span<const double> x, At at) {
  return forward(model.spec(), model.params_at(at), x);
}

Vector outputs(const NeuralModel& model, std::span<const double> x, OutputSpace space, At at) {
  Vector z = forward(model, x, at);
  return space == OutputSpace::kProbabilities ? softmax(z) : z;
}

Vector softmax(std::span<const double> logits) {
  Vector p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double s = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::size_t predict(const NeuralModel& model, std::span<const double> x) {
  return argmax(forward(model, x));
}

double top_two_gap(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double first = -std::numeric_limits<double>::infinity();
  double second = first;
  for (double x : v) {
    if (x > first) {
      second = first;
      first = x;
    } else if (x > second) {
      second = x;
    }
  }
  return first - second;
}

double predict_margin(const NeuralModel& model, std::span<const double> x, OutputSpace space) {
  return top_two_gap(outputs(model, x, space));
}

DenseMatrix param_jacobian(const NeuralModel& model, std::span<const double> x, At at) {
  const ModelSpec& spec = model.spec();
  check_input(spec, x);
  const auto views = layer_views(spec);
  const auto params = model.params_at(at);
  detail::BatchTrace trace;
  detail::forward_batch(spec, views, params, as_row(x), trace);

  const std::size_t k_out = spec.num_classes;
  DenseMatrix jac(k_out, model.param_count());
  // delta row k = d logit_k / d pre-activation of the current layer.
  DenseMatrix delta = DenseMatrix::identity(k_out);
  for (std::size_t l = views.size(); l-- > 0;) {
    const auto& v = views[l];
    const auto h = trace.post[l].row(0);
    for (std::size_t k = 0; k < k_out; ++k) {
      auto jk = jac.row(k);
      for (std::size_t o = 0; o < v.out; ++o) {
        const double d = delta(k, o);
        if (d == 0.0) continue;
        simd::axpy(d, h, jk.subspan(v.weight_offset + o * v.in, v.in));
        if (v.has_bias) jk[v.bias_offset + o] = d;
      }
    }
    if (l == 0) break;
    DenseMatrix prev(k_out, v.in);
    const auto pre = trace.pre[l - 1].row(0);
    const auto post = trace.post[l].row(0);
    for (std::size_t k = 0; k < k_out; ++k) {
      auto pk = prev.row(k);
      for (std::size_t o = 0; o < v.out; ++o) {
        const double d = delta(k, o);
        if (d != 0.0) simd::axpy(d, params.subspan(v.weight_offset + o * v.in, v.in), pk);
      }
      for (std::size_t i = 0; i < v.in; ++i) {
        pk[i] *= detail::activation_slope(spec.activation, pre[i], post[i]);
      }
    }
    delta = std::move(prev);
  }
  return jac;
}

Vector linearized_forward(const NeuralModel& model, std::span<const double> x) {
  Vector base = forward(model, x, At::kInit);
  const DenseMatrix jac = param_jacobian(model, x, At::kInit);
  const Vector delta = model.weight_change();
  const Vector change = linalg::matvec(jac, delta);
  for (std::size_t k = 0; k < base.size(); ++k) base[k] += change[k];
  return base;
}

double accuracy(const NeuralModel& model, const data::Dataset& data) {
  if (data.size() == 0) throw DataError("accuracy on an empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (static_cast<int>(predict(model, data.x(i))) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace merkit::nn
