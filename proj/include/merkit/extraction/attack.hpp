#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "merkit/data/dataset.hpp"
#include "merkit/nn/train.hpp"

namespace merkit::extraction {

using linalg::DenseMatrix;
using linalg::Vector;
using nn::NeuralModel;

enum class Strategy { kFull, kRandom, kUncertainty, kKCenter, kJbda };
enum class OracleMode { kProbabilities, kLabelsOnly };

const char* to_string(Strategy s) noexcept;
Strategy strategy_from_string(const std::string& s);
const char* to_string(OracleMode m) noexcept;
OracleMode oracle_mode_from_string(const std::string& s);

struct AttackConfig {
  Strategy strategy = Strategy::kFull;
  /// Total victim queries; ignored by kFull.
  std::size_t budget = 0;
  /// Selection rounds for kUncertainty / kKCenter, augmentation rounds for kJbda.
  std::size_t rounds = 1;
  OracleMode oracle_mode = OracleMode::kProbabilities;
  double jbda_step = 0.1;
  nn::TrainConfig surrogate_train;
  /// Surrogate starts from the victim's theta0; otherwise from a fresh draw
  /// seeded by `seed`.
  bool shared_init = true;
  /// Surrogate starts from the victim's trained parameters (self-attack).
  bool start_from_victim = false;
  std::uint64_t seed = 0;

  void validate() const;
  std::string canonical() const;
};

struct RoundRecord {
  std::size_t queries = 0;
  double fidelity = 0.0;
};

struct AttackResult {
  NeuralModel surrogate;
  /// Best fidelity over all training epochs of the final round.
  double fidelity = 0.0;
  /// Accuracy of that best checkpoint on the eval labels.
  double attack_accuracy = 0.0;
  std::size_t queries_used = 0;
  std::vector<RoundRecord> per_round;
};

/// Fraction of rows where the two models' argmaxes agree.
double fidelity(const NeuralModel& a, const NeuralModel& b, const data::Dataset& eval_set);

/// x - step * grad_x CE(onehot(label), f(x)).
Vector jbda_craft(const NeuralModel& surrogate, std::span<const double> x, std::size_t label,
                  double step);

AttackResult run_attack(const NeuralModel& victim, const data::Dataset& pool,
                        const AttackConfig& cfg, const data::Dataset& eval_set);

nlohmann::json to_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const nlohmann::json& j);
nlohmann::json report_json(const AttackResult& result, const AttackConfig& cfg);

}  // namespace merkit::extraction
