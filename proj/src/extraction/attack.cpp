#include "merkit/extraction/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "merkit/digest.hpp"
#include "merkit/error.hpp"
#include "merkit/nn/serialize.hpp"
#include "merkit/parallel.hpp"

namespace merkit::extraction {

const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::kFull: return "full";
    case Strategy::kRandom: return "random";
    case Strategy::kUncertainty: return "uncertainty";
    case Strategy::kKCenter: return "kcenter";
    case Strategy::kJbda: return "jbda";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  for (Strategy v : {Strategy::kFull, Strategy::kRandom, Strategy::kUncertainty,
                     Strategy::kKCenter, Strategy::kJbda}) {
    if (s == to_string(v)) return v;
  }
  throw ParameterError("unknown strategy '" + s +
                       "' (expected full, random, uncertainty, kcenter or jbda)");
}

const char* to_string(OracleMode m) noexcept {
  return m == OracleMode::kProbabilities ? "probabilities" : "labels_only";
}

OracleMode oracle_mode_from_string(const std::string& s) {
  if (s == "probabilities") return OracleMode::kProbabilities;
  if (s == "labels_only") return OracleMode::kLabelsOnly;
  throw ParameterError("unknown oracle mode '" + s + "' (expected probabilities or labels_only)");
}

void AttackConfig::validate() const {
  surrogate_train.validate();
  if (strategy != Strategy::kFull && budget == 0) {
    throw ParameterError("budget must be >= 1 for strategy " + std::string(to_string(strategy)));
  }
  if (rounds == 0) throw ParameterError("rounds must be >= 1");
  if (strategy == Strategy::kJbda && !(jbda_step > 0.0)) {
    throw ParameterError("jbda_step must be > 0");
  }
}

std::string AttackConfig::canonical() const {
  std::ostringstream s;
  s.precision(17);
  s << "budget=" << budget << "\njbda_step=" << jbda_step << "\noracle_mode="
    << to_string(oracle_mode) << "\nrounds=" << rounds << "\nseed=" << seed
    << "\nshared_init=" << shared_init << "\nstart_from_victim=" << start_from_victim
    << "\nstrategy=" << to_string(strategy) << "\n"
    << surrogate_train.canonical();
  return s.str();
}

double fidelity(const NeuralModel& a, const NeuralModel& b, const data::Dataset& eval_set) {
  if (a.input_dim() != b.input_dim() || a.num_classes() != b.num_classes()) {
    throw DimensionError("fidelity needs models with the same input and output shape");
  }
  if (eval_set.size() == 0) throw DataError("fidelity on an empty eval set");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < eval_set.size(); ++i) {
    if (nn::predict(a, eval_set.x(i)) == nn::predict(b, eval_set.x(i))) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(eval_set.size());
}

Vector jbda_craft(const NeuralModel& surrogate, std::span<const double> x, std::size_t label,
                  double step) {
  Vector target(surrogate.num_classes(), 0.0);
  target.at(label) = 1.0;
  const Vector g = nn::input_gradient(surrogate, x, target, nn::Loss::kCrossEntropy);
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= step * g[i];
  return out;
}

namespace {

class Oracle {
 public:
  Oracle(const NeuralModel& victim, OracleMode mode) : victim_(victim), mode_(mode) {}

  /// Answers for every row, counting each as one query.
  DenseMatrix ask(const DenseMatrix& xs) {
    DenseMatrix out(xs.rows(), victim_.num_classes());
    parallel_for(xs.rows(), [&](std::size_t i) {
      const Vector p = nn::softmax(nn::forward(victim_, xs.row(i)));
      auto row = out.row(i);
      if (mode_ == OracleMode::kProbabilities) {
        std::copy(p.begin(), p.end(), row.begin());
      } else {
        row[nn::argmax(p)] = 1.0;
      }
    });
    queries_ += xs.rows();
    return out;
  }

  std::size_t queries() const noexcept { return queries_; }

 private:
  const NeuralModel& victim_;
  OracleMode mode_;
  std::size_t queries_ = 0;
};

struct Fit {
  NeuralModel best;
  double fidelity;
};

NeuralModel fresh_surrogate(const NeuralModel& victim, const AttackConfig& cfg) {
  if (cfg.start_from_victim) {
    const auto t0 = victim.init_params();
    const auto t = victim.params();
    return NeuralModel(victim.spec(), Vector(t0.begin(), t0.end()), Vector(t.begin(), t.end()));
  }
  if (cfg.shared_init) return victim.at_init();
  nn::ModelSpec spec = victim.spec();
  spec.init_seed = cfg.seed ^ 0x5eedULL;
  return NeuralModel(spec);
}

/// Trains a fresh surrogate on (xs, ys), keeping the epoch with the best
/// fidelity against the victim on eval_set.
Fit fit_surrogate(const NeuralModel& victim, const AttackConfig& cfg, const DenseMatrix& xs,
                  const DenseMatrix& ys, const data::Dataset& eval_set,
                  const std::vector<std::size_t>& victim_pred) {
  NeuralModel model = fresh_surrogate(victim, cfg);
  auto agreement = [&](const NeuralModel& m) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      if (nn::predict(m, eval_set.x(i)) == victim_pred[i]) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(eval_set.size());
  };
  Fit fit{model, -1.0};
  nn::train_soft(model, xs, ys, cfg.surrogate_train, [&](std::size_t, const NeuralModel& m) {
    const double f = agreement(m);
    if (f > fit.fidelity) {
      fit.fidelity = f;
      fit.best = m;
    }
  });
  return fit;
}

DenseMatrix gather(const data::Dataset& pool, const std::vector<std::size_t>& ids) {
  DenseMatrix out(ids.size(), pool.dim());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::copy(pool.x(ids[r]).begin(), pool.x(ids[r]).end(), out.row(r).begin());
  }
  return out;
}

DenseMatrix append_rows(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() == 0) return b;
  DenseMatrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.data().size());
  return out;
}

/// Per-round increments summing to total.
std::vector<std::size_t> round_sizes(std::size_t total, std::size_t rounds) {
  rounds = std::min(rounds, total);
  std::vector<std::size_t> sizes(rounds, total / rounds);
  for (std::size_t r = 0; r < total % rounds; ++r) ++sizes[r];
  return sizes;
}

std::vector<std::size_t> pick_uncertain(const NeuralModel& surrogate, const data::Dataset& pool,
                                        const std::vector<std::size_t>& candidates,
                                        std::size_t count) {
  Vector margin(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t c) {
    margin[c] = nn::predict_margin(surrogate, pool.x(candidates[c]),
                                   nn::OutputSpace::kProbabilities);
  });
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return margin[a] < margin[b]; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(candidates[order[i]]);
  return out;
}

std::vector<std::size_t> pick_kcenter(const NeuralModel& surrogate, const data::Dataset& pool,
                                      const std::vector<std::size_t>& chosen,
                                      const std::vector<std::size_t>& candidates,
                                      std::size_t count) {
  const std::size_t k = surrogate.num_classes();
  DenseMatrix emb(pool.size(), k);
  parallel_for(pool.size(), [&](std::size_t i) {
    const Vector p = nn::softmax(nn::forward(surrogate, pool.x(i)));
    std::copy(p.begin(), p.end(), emb.row(i).begin());
  });
  auto dist2 = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = emb(a, j) - emb(b, j);
      s += d * d;
    }
    return s;
  };
  Vector nearest(candidates.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (std::size_t s : chosen) nearest[c] = std::min(nearest[c], dist2(candidates[c], s));
  }
  std::vector<bool> taken(candidates.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t step = 0; step < count; ++step) {
    std::size_t best = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!taken[c] && (best == candidates.size() || nearest[c] > nearest[best])) best = c;
    }
    taken[best] = true;
    out.push_back(candidates[best]);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!taken[c]) nearest[c] = std::min(nearest[c], dist2(candidates[c], candidates[best]));
    }
  }
  return out;
}

}  // namespace

AttackResult run_attack(const NeuralModel& victim, const data::Dataset& pool,
                        const AttackConfig& cfg, const data::Dataset& eval_set) {
  cfg.validate();
  if (pool.size() == 0) throw DataError("attack pool is empty");
  if (eval_set.size() == 0) throw DataError("attack eval set is empty");
  if (pool.dim() != victim.input_dim() || eval_set.dim() != victim.input_dim()) {
    throw DimensionError("attack data dimension does not match the victim");
  }
  const bool pool_based = cfg.strategy != Strategy::kFull && cfg.strategy != Strategy::kJbda;
  if (pool_based && cfg.budget > pool.size()) {
    throw ParameterError("budget " + std::to_string(cfg.budget) + " exceeds the pool size " +
                         std::to_string(pool.size()));
  }

  std::vector<std::size_t> victim_pred(eval_set.size());
  for (std::size_t i = 0; i < eval_set.size(); ++i) {
    victim_pred[i] = nn::predict(victim, eval_set.x(i));
  }
  Oracle oracle(victim, cfg.oracle_mode);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  AttackResult result{victim.at_init(), 0.0, 0.0, 0, {}};
  DenseMatrix xs;
  DenseMatrix ys;
  std::optional<Fit> fit;
  auto train_round = [&]() {
    fit = fit_surrogate(victim, cfg, xs, ys, eval_set, victim_pred);
    result.per_round.push_back({oracle.queries(), fit->fidelity});
  };

  switch (cfg.strategy) {
    case Strategy::kFull:
    case Strategy::kRandom: {
      const std::size_t n = cfg.strategy == Strategy::kFull ? pool.size() : cfg.budget;
      std::vector<std::size_t> ids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
      if (cfg.strategy == Strategy::kFull) std::sort(ids.begin(), ids.end());
      xs = gather(pool, ids);
      ys = oracle.ask(xs);
      train_round();
      break;
    }
    case Strategy::kUncertainty:
    case Strategy::kKCenter: {
      const auto sizes = round_sizes(cfg.budget, cfg.rounds);
      std::vector<std::size_t> chosen(order.begin(),
                                      order.begin() + static_cast<std::ptrdiff_t>(sizes[0]));
      xs = gather(pool, chosen);
      ys = oracle.ask(xs);
      train_round();
      for (std::size_t r = 1; r < sizes.size(); ++r) {
        std::vector<bool> used(pool.size(), false);
        for (std::size_t i : chosen) used[i] = true;
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          if (!used[i]) candidates.push_back(i);
        }
        const auto picked =
            cfg.strategy == Strategy::kUncertainty
                ? pick_uncertain(fit->best, pool, candidates, sizes[r])
                : pick_kcenter(fit->best, pool, chosen, candidates, sizes[r]);
        const DenseMatrix new_x = gather(pool, picked);
        xs = append_rows(xs, new_x);
        ys = append_rows(ys, oracle.ask(new_x));
        chosen.insert(chosen.end(), picked.begin(), picked.end());
        train_round();
      }
      break;
    }
    case Strategy::kJbda: {
      const double scale = std::ldexp(1.0, -static_cast<int>(cfg.rounds));
      const auto seed_size = std::min<std::size_t>(
          pool.size(), std::max<std::size_t>(
                           1, static_cast<std::size_t>(
                                  std::ceil(static_cast<double>(cfg.budget) * scale))));
      std::vector<std::size_t> seed_ids(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(seed_size));
      xs = gather(pool, seed_ids);
      ys = oracle.ask(xs);
      train_round();
      for (std::size_t r = 0; r < cfg.rounds && oracle.queries() < cfg.budget; ++r) {
        const std::size_t room = cfg.budget - oracle.queries();
        const std::size_t count = std::min(room, xs.rows());
        DenseMatrix crafted(count, xs.cols());
        const NeuralModel& sur = fit->best;
        parallel_for(count, [&](std::size_t i) {
          const Vector c = jbda_craft(sur, xs.row(i), nn::argmax(ys.row(i)), cfg.jbda_step);
          std::copy(c.begin(), c.end(), crafted.row(i).begin());
        });
        if (!crafted.all_finite()) throw DataError("JBDA produced non-finite inputs");
        xs = append_rows(xs, crafted);
        ys = append_rows(ys, oracle.ask(crafted));
        train_round();
      }
      break;
    }
  }

  result.surrogate = fit->best;
  result.fidelity = fit->fidelity;
  result.queries_used = oracle.queries();
  result.attack_accuracy = nn::accuracy(result.surrogate, eval_set);
  return result;
}

nlohmann::json to_json(const AttackConfig& cfg) {
  return nlohmann::json{{"strategy", to_string(cfg.strategy)},
                        {"budget", cfg.budget},
                        {"rounds", cfg.rounds},
                        {"oracle_mode", to_string(cfg.oracle_mode)},
                        {"jbda_step", cfg.jbda_step},
                        {"surrogate_train", nn::to_json(cfg.surrogate_train)},
                        {"shared_init", cfg.shared_init},
                        {"start_from_victim", cfg.start_from_victim},
                        {"seed", cfg.seed}};
}

AttackConfig attack_config_from_json(const nlohmann::json& j) {
  AttackConfig c;
  c.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  c.budget = j.at("budget").get<std::size_t>();
  c.rounds = j.at("rounds").get<std::size_t>();
  c.oracle_mode = oracle_mode_from_string(j.at("oracle_mode").get<std::string>());
  c.jbda_step = j.at("jbda_step").get<double>();
  c.surrogate_train = nn::train_config_from_json(j.at("surrogate_train"));
  c.shared_init = j.at("shared_init").get<bool>();
  c.start_from_victim = j.value("start_from_victim", false);
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json report_json(const AttackResult& result, const AttackConfig& cfg) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : result.per_round) {
    rounds.push_back({{"queries", r.queries}, {"fidelity", r.fidelity}});
  }
  return nlohmann::json{{"config_digest", sha256_hex(cfg.canonical())},
                        {"config", to_json(cfg)},
                        {"fidelity", result.fidelity},
                        {"attack_accuracy", result.attack_accuracy},
                        {"queries_used", result.queries_used},
                        {"per_round", rounds}};
}

}  // namespace merkit::extraction
