#include "merkit/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "engine.hpp"
#include "merkit/data/dataset.hpp"
#include "merkit/error.hpp"
#include "merkit/simd/kernels.hpp"

namespace merkit::nn {

namespace detail {

void forward_batch(const ModelSpec& spec, const std::vector<LayerView>& views,
                   std::span<const double> params, const DenseMatrix& inputs, BatchTrace& trace) {
  const std::size_t batch = inputs.rows();
  trace.pre.resize(views.size());
  trace.post.resize(views.size());
  trace.post[0] = inputs;
  for (std::size_t l = 0; l < views.size(); ++l) {
    const auto& v = views[l];
    DenseMatrix& z = trace.pre[l];
    if (z.rows() != batch || z.cols() != v.out) z = DenseMatrix(batch, v.out);
    const DenseMatrix& h = trace.post[l];
    for (std::size_t b = 0; b < batch; ++b) {
      const auto hb = h.row(b);
      auto zb = z.row(b);
      for (std::size_t o = 0; o < v.out; ++o) {
        double s = simd::dot(params.subspan(v.weight_offset + o * v.in, v.in), hb);
        if (v.has_bias) s += params[v.bias_offset + o];
        zb[o] = s;
      }
    }
    if (l + 1 < views.size()) {
      DenseMatrix& a = trace.post[l + 1];
      if (a.rows() != batch || a.cols() != v.out) a = DenseMatrix(batch, v.out);
      const auto zs = z.data();
      auto as = a.data();
      for (std::size_t i = 0; i < zs.size(); ++i) as[i] = activate(spec.activation, zs[i]);
    }
  }
}

void backward_batch(const ModelSpec& spec, const std::vector<LayerView>& views,
                    std::span<const double> params, const BatchTrace& trace, DenseMatrix& dlogits,
                    std::span<double> grad, DenseMatrix* input_grad) {
  const std::size_t batch = dlogits.rows();
  DenseMatrix delta = std::move(dlogits);
  for (std::size_t l = views.size(); l-- > 0;) {
    const auto& v = views[l];
    const DenseMatrix& h = trace.post[l];
    for (std::size_t o = 0; o < v.out; ++o) {
      auto gw = grad.subspan(v.weight_offset + o * v.in, v.in);
      double gb = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double d = delta(b, o);
        if (d == 0.0) continue;
        simd::axpy(d, h.row(b), gw);
        gb += d;
      }
      if (v.has_bias) grad[v.bias_offset + o] += gb;
    }
    if (l == 0 && input_grad == nullptr) break;
    DenseMatrix prev(batch, v.in);
    for (std::size_t b = 0; b < batch; ++b) {
      auto pb = prev.row(b);
      for (std::size_t o = 0; o < v.out; ++o) {
        const double d = delta(b, o);
        if (d != 0.0) simd::axpy(d, params.subspan(v.weight_offset + o * v.in, v.in), pb);
      }
    }
    if (l == 0) {
      *input_grad = std::move(prev);
      break;
    }
    const auto pre = trace.pre[l - 1].data();
    const auto post = trace.post[l].data();
    auto ps = prev.data();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i] *= activation_slope(spec.activation, pre[i], post[i]);
    }
    delta = std::move(prev);
  }
}

void loss_rows(Loss loss, const DenseMatrix& logits, const DenseMatrix& targets, double scale,
               std::span<double> row_loss, DenseMatrix& dlogits) {
  const std::size_t batch = logits.rows();
  const std::size_t k = logits.cols();
  if (dlogits.rows() != batch || dlogits.cols() != k) dlogits = DenseMatrix(batch, k);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto z = logits.row(b);
    const auto t = targets.row(b);
    auto g = dlogits.row(b);
    if (loss == Loss::kCrossEntropy) {
      const double m = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += std::exp(z[i] - m);
      const double log_norm = m + std::log(s);
      double l = 0.0;
      double tsum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double logp = z[i] - log_norm;
        if (t[i] != 0.0) l -= t[i] * logp;
        tsum += t[i];
        g[i] = std::exp(logp);
      }
      // d/dz of -sum t log softmax(z) is softmax(z) * sum(t) - t.
      for (std::size_t i = 0; i < k; ++i) g[i] = scale * (g[i] * tsum - t[i]);
      row_loss[b] = l;
    } else {
      double l = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double r = z[i] - t[i];
        l += 0.5 * r * r;
        g[i] = scale * r;
      }
      row_loss[b] = l;
    }
  }
}

}  // namespace detail

const char* to_string(Optimizer o) noexcept { return o == Optimizer::kSgd ? "sgd" : "adam"; }
const char* to_string(Loss l) noexcept { return l == Loss::kCrossEntropy ? "cross_entropy" : "mse"; }

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return Optimizer::kSgd;
  if (s == "adam") return Optimizer::kAdam;
  throw ParameterError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

Loss loss_from_string(const std::string& s) {
  if (s == "cross_entropy" || s == "ce") return Loss::kCrossEntropy;
  if (s == "mse") return Loss::kMse;
  throw ParameterError("unknown loss '" + s + "' (expected cross_entropy or mse)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be finite and non-negative");
  }
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (adversarial) {
    if (!(adversarial->epsilon > 0.0)) throw ParameterError("PGD epsilon must be > 0");
    if (adversarial->steps < 1) throw ParameterError("PGD steps must be >= 1");
    if (!(adversarial->step_size > 0.0)) throw ParameterError("PGD step_size must be > 0");
  }
}

std::string TrainConfig::canonical() const {
  std::ostringstream s;
  s.precision(17);
  s << "batch_size=" << batch_size << "\nepochs=" << epochs << "\nlearning_rate=" << learning_rate
    << "\nloss=" << to_string(loss) << "\nmomentum=" << momentum
    << "\noptimizer=" << to_string(optimizer) << "\nseed=" << seed
    << "\nweight_decay=" << weight_decay << "\n";
  if (adversarial) {
    s << "adversarial.epsilon=" << adversarial->epsilon << "\nadversarial.step_size="
      << adversarial->step_size << "\nadversarial.steps=" << adversarial->steps << "\n";
  }
  return s.str();
}

DenseMatrix one_hot(std::span<const int> labels, std::size_t num_classes) {
  DenseMatrix t(labels.size(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                      " is outside [0, " + std::to_string(num_classes) + ")");
    }
    t(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return t;
}

LossGradient loss_and_gradient(const NeuralModel& model, const DenseMatrix& inputs,
                               const DenseMatrix& targets, Loss loss) {
  const auto views = layer_views(model.spec());
  detail::BatchTrace trace;
  detail::forward_batch(model.spec(), views, model.params(), inputs, trace);
  const double scale = 1.0 / static_cast<double>(inputs.rows());
  Vector row_loss(inputs.rows());
  DenseMatrix dlogits;
  detail::loss_rows(loss, trace.logits(), targets, scale, row_loss, dlogits);
  LossGradient out;
  out.gradient.assign(model.param_count(), 0.0);
  detail::backward_batch(model.spec(), views, model.params(), trace, dlogits, out.gradient,
                         nullptr);
  out.loss = std::accumulate(row_loss.begin(), row_loss.end(), 0.0) * scale;
  return out;
}

Vector input_gradient(const NeuralModel& model, std::span<const double> x,
                      std::span<const double> target, Loss loss) {
  if (x.size() != model.input_dim()) {
    throw DimensionError("input_gradient: input has dimension " + std::to_string(x.size()));
  }
  if (target.size() != model.num_classes()) {
    throw DimensionError("input_gradient: target has length " + std::to_string(target.size()));
  }
  const auto views = layer_views(model.spec());
  DenseMatrix in(1, x.size(), Vector(x.begin(), x.end()));
  DenseMatrix tg(1, target.size(), Vector(target.begin(), target.end()));
  detail::BatchTrace trace;
  detail::forward_batch(model.spec(), views, model.params(), in, trace);
  Vector row_loss(1);
  DenseMatrix dlogits;
  detail::loss_rows(loss, trace.logits(), tg, 1.0, row_loss, dlogits);
  Vector scratch(model.param_count(), 0.0);
  DenseMatrix dx;
  detail::backward_batch(model.spec(), views, model.params(), trace, dlogits, scratch, &dx);
  return Vector(dx.row(0).begin(), dx.row(0).end());
}

Vector pgd_perturb(const NeuralModel& model, std::span<const double> x,
                   std::span<const double> target, const AdversarialConfig& cfg, Loss loss) {
  Vector adv(x.begin(), x.end());
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const Vector g = input_gradient(model, adv, target, loss);
    for (std::size_t i = 0; i < adv.size(); ++i) {
      const double sign = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
      const double moved = adv[i] + cfg.step_size * sign;
      adv[i] = std::clamp(moved, x[i] - cfg.epsilon, x[i] + cfg.epsilon);
    }
  }
  return adv;
}

namespace {

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& cfg, std::size_t p)
      : cfg_(cfg), first_(p, 0.0), second_(cfg.optimizer == Optimizer::kAdam ? p : 0, 0.0) {}

  void step(std::span<double> theta, std::span<double> grad) {
    const double lr = cfg_.learning_rate;
    if (cfg_.weight_decay != 0.0) simd::axpy(cfg_.weight_decay, theta, grad);
    if (cfg_.optimizer == Optimizer::kSgd) {
      if (cfg_.momentum != 0.0) {
        for (std::size_t i = 0; i < grad.size(); ++i) {
          first_[i] = cfg_.momentum * first_[i] + grad[i];
        }
        simd::axpy(-lr, first_, theta);
      } else {
        simd::axpy(-lr, grad, theta);
      }
      return;
    }
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < grad.size(); ++i) {
      first_[i] = kBeta1 * first_[i] + (1.0 - kBeta1) * grad[i];
      second_[i] = kBeta2 * second_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      theta[i] -= lr * (first_[i] / c1) / (std::sqrt(second_[i] / c2) + kEps);
    }
  }

 private:
  const TrainConfig& cfg_;
  Vector first_;
  Vector second_;
  std::size_t t_ = 0;
};

double argmax_agreement(const NeuralModel& model, const DenseMatrix& inputs,
                        const DenseMatrix& targets) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    if (predict(model, inputs.row(i)) == argmax(targets.row(i))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.rows());
}

}  // namespace

TrainReport train_soft(NeuralModel& model, const DenseMatrix& inputs, const DenseMatrix& targets,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const std::size_t n = inputs.rows();
  if (n == 0) throw DataError("cannot train on an empty dataset");
  if (inputs.cols() != model.input_dim()) {
    throw DimensionError("training inputs have dimension " + std::to_string(inputs.cols()) +
                         ", model expects " + std::to_string(model.input_dim()));
  }
  if (targets.rows() != n || targets.cols() != model.num_classes()) {
    throw DimensionError("training targets must be " + std::to_string(n) + "x" +
                         std::to_string(model.num_classes()));
  }

  const ModelSpec& spec = model.spec();
  const auto views = layer_views(spec);
  const std::size_t p = model.param_count();
  OptimizerState opt(cfg, p);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  detail::BatchTrace trace;
  DenseMatrix dlogits;
  Vector grad(p);
  Vector sample_loss(n);
  TrainReport report;
  report.loss_curve.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t bs = std::min(cfg.batch_size, n - start);
      DenseMatrix xb(bs, inputs.cols());
      DenseMatrix tb(bs, targets.cols());
      for (std::size_t b = 0; b < bs; ++b) {
        const std::size_t idx = order[start + b];
        std::copy(targets.row(idx).begin(), targets.row(idx).end(), tb.row(b).begin());
        if (cfg.adversarial) {
          const Vector adv = pgd_perturb(model, inputs.row(idx), targets.row(idx),
                                         *cfg.adversarial, cfg.loss);
          std::copy(adv.begin(), adv.end(), xb.row(b).begin());
        } else {
          std::copy(inputs.row(idx).begin(), inputs.row(idx).end(), xb.row(b).begin());
        }
      }
      detail::forward_batch(spec, views, model.params(), xb, trace);
      Vector batch_loss(bs);
      detail::loss_rows(cfg.loss, trace.logits(), tb, 1.0 / static_cast<double>(bs), batch_loss,
                        dlogits);
      for (std::size_t b = 0; b < bs; ++b) sample_loss[order[start + b]] = batch_loss[b];
      std::fill(grad.begin(), grad.end(), 0.0);
      detail::backward_batch(spec, views, model.params(), trace, dlogits, grad, nullptr);
      opt.step(model.mutable_params(), grad);
    }
    report.loss_curve.push_back(std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0) /
                                static_cast<double>(n));
    if (!std::isfinite(report.loss_curve.back())) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch + 1));
    }
    if (on_epoch) on_epoch(epoch, model);
  }
  report.final_accuracy = argmax_agreement(model, inputs, targets);
  return report;
}

TrainReport train(NeuralModel& model, const data::Dataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  if (data.size() == 0) throw DataError("cannot train on an empty dataset");
  const DenseMatrix targets = one_hot(data.labels, model.num_classes());
  return train_soft(model, data.features, targets, cfg, on_epoch);
}

}  // namespace merkit::nn
