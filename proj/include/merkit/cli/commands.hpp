#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "merkit/error.hpp"
#include "merkit/inspector/pairs.hpp"

namespace merkit::cli {

/// 0 ok, 2 config, 3 training, 4 numerical, 5 fixture.
int exit_code_for(ErrorKind kind) noexcept;

/// Each command writes its artifacts plus one manifest and returns the JSON
/// document it printed or stored, so tests can compare against library calls.

struct GenerateArgs {
  std::string config;
  std::string out_prefix;
};
nlohmann::json cmd_generate(const GenerateArgs& a);

struct TrainArgs {
  std::string spec;
  std::string data;
  std::string train_cfg;
  std::string out;
};
nlohmann::json cmd_train(const TrainArgs& a);

struct AssessArgs {
  std::string victim;
  std::string pool;
  std::string test;
  std::string mrc_cfg;
  std::string out;
  std::string model_id;
  std::string dataset_id;
};
nlohmann::json cmd_assess(const AssessArgs& a);

struct BoundArgs {
  std::string victim;
  std::string surrogate;
  std::string samples;
  std::string bound_cfg;
  std::string out;
};
nlohmann::json cmd_bound(const BoundArgs& a);

struct AttackArgs {
  std::string victim;
  std::string pool;
  /// Fidelity is measured on the pool when empty.
  std::string eval;
  std::string attack_cfg;
  std::string out;
  std::string surrogate_out;
};
nlohmann::json cmd_attack(const AttackArgs& a);

/// Models for pairing come either from the fixture tables or from a JSONL file
/// of measured rows {model_id, dataset_id, group, vma, mrc, fidelity}.
struct ModelSource {
  std::string fixtures_dir;
  std::string measured;
};
std::vector<inspector::MeasuredModel> load_models(const ModelSource& src);
void write_measured(const std::vector<inspector::MeasuredModel>& models, const std::string& path);

struct PairsArgs {
  ModelSource source;
  std::string scope = "all";
  std::string features = "vma+mrc";
  bool augment = true;
  std::uint64_t seed = 0;
  std::string out;
};
nlohmann::json cmd_pairs(const PairsArgs& a);

struct InspectArgs {
  ModelSource source;
  std::string scope = "all";
  std::string features = "vma+mrc";
  bool augment = true;
  std::vector<std::uint64_t> seeds{0};
  std::size_t epochs = 500;
  std::string out;
};
nlohmann::json cmd_inspect(const InspectArgs& a);

struct Table1Args {
  std::string fixtures_dir;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t epochs = 500;
  std::string out_dir;
};
nlohmann::json cmd_reproduce_table1(const Table1Args& a);

struct StatsArgs {
  ModelSource source;
  std::string out_dir;
};
nlohmann::json cmd_stats(const StatsArgs& a);

nlohmann::json cmd_fixtures_check(const std::string& fixtures_dir);

}  // namespace merkit::cli
