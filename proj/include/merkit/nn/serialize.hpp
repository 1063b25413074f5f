#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "merkit/nn/model.hpp"
#include "merkit/nn/train.hpp"

namespace merkit::nn {

/// A model file: spec, both parameter vectors, the seeds that produced it and
/// the digest of the training config (empty for untrained models).
struct ModelRecord {
  NeuralModel model;
  std::vector<std::uint64_t> seeds;
  std::string train_config_digest;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelRecord& rec);
/// Throws ParseError on missing or ill-typed fields.
ModelRecord model_from_json(const nlohmann::json& j);

void save_model(const ModelRecord& rec, const std::string& path);
ModelRecord load_model(const std::string& path);

}  // namespace merkit::nn
