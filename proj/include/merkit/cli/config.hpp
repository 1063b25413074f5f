#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "merkit/data/dataset.hpp"
#include "merkit/extraction/attack.hpp"
#include "merkit/nn/train.hpp"
#include "merkit/risk/risk.hpp"

namespace merkit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// key = value file with [section] headers.
using Config = boost::property_tree::ptree;

/// Throws ParseError with the offending line on malformed input.
Config load_config(const std::string& path);
Config parse_config(const std::string& text);
/// Sorted "section.key=value" lines; stable across key order and whitespace.
std::string canonical(const Config& cfg);
std::string digest(const Config& cfg);

/// Section readers. model_spec_from leaves input_dim and num_classes at 0 when
/// absent so callers can take them from the data. Unknown keys raise ParameterError so typos do not pass
/// silently; absent keys keep the library defaults.
nn::ModelSpec model_spec_from(const Config& cfg, const std::string& section = "model");
nn::TrainConfig train_config_from(const Config& cfg, const std::string& section = "train");
risk::MrcConfig mrc_config_from(const Config& cfg, std::size_t pool_size,
                                const std::string& section = "mrc");
extraction::AttackConfig attack_config_from(const Config& cfg,
                                            const std::string& section = "attack");

struct BoundConfig {
  std::vector<double> gammas;
  double delta = 0.05;
  double clip_q = 0.5;
  bool clip = true;
  nn::At eval_point = nn::At::kInit;
};
BoundConfig bound_config_from(const Config& cfg, const std::string& section = "bound");

struct DataConfig {
  std::string generator = "blobs";
  std::size_t n = 400;
  std::size_t dim = 2;
  std::size_t classes = 2;
  double spread = 0.5;
  double noise = 0.1;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
};
DataConfig data_config_from(const Config& cfg, const std::string& section = "data");
data::Dataset generate(const DataConfig& cfg);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started;
  std::string finished;
  std::string tool_version = kToolVersion;
};

/// UTC, ISO 8601.
std::string timestamp_now();
nlohmann::json to_json(const RunManifest& m);
/// Writes <primary output>.manifest.json and returns its path.
std::string write_manifest(const RunManifest& m, const std::string& primary_output);

}  // namespace merkit::cli
