#include "merkit/nn/serialize.hpp"

#include <fstream>

#include "merkit/error.hpp"

namespace merkit::nn {

using nlohmann::json;

nlohmann::json to_json(const ModelSpec& spec) {
  return json{{"input_dim", spec.input_dim},
              {"layer_widths", spec.layer_widths},
              {"num_classes", spec.num_classes},
              {"activation", to_string(spec.activation)},
              {"init_seed", spec.init_seed},
              {"init_scale", spec.init_scale},
              {"bias", spec.bias}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
  s.num_classes = j.at("num_classes").get<std::size_t>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
  s.init_seed = j.at("init_seed").get<std::uint64_t>();
  s.init_scale = j.at("init_scale").get<double>();
  s.bias = j.value("bias", true);
  s.validate();
  return s;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  json j{{"optimizer", to_string(cfg.optimizer)},
         {"learning_rate", cfg.learning_rate},
         {"epochs", cfg.epochs},
         {"batch_size", cfg.batch_size},
         {"momentum", cfg.momentum},
         {"weight_decay", cfg.weight_decay},
         {"loss", to_string(cfg.loss)},
         {"seed", cfg.seed}};
  if (cfg.adversarial) {
    j["adversarial"] = json{{"epsilon", cfg.adversarial->epsilon},
                            {"step_size", cfg.adversarial->step_size},
                            {"steps", cfg.adversarial->steps}};
  }
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.momentum = j.at("momentum").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.loss = loss_from_string(j.at("loss").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("adversarial")) {
    const auto& a = j.at("adversarial");
    c.adversarial = AdversarialConfig{a.at("epsilon").get<double>(),
                                      a.at("step_size").get<double>(),
                                      a.at("steps").get<std::size_t>()};
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ModelRecord& rec) {
  const auto t0 = rec.model.init_params();
  const auto t = rec.model.params();
  return json{{"spec", to_json(rec.model.spec())},
              {"theta0", std::vector<double>(t0.begin(), t0.end())},
              {"theta", std::vector<double>(t.begin(), t.end())},
              {"seeds", rec.seeds},
              {"train_config_digest", rec.train_config_digest}};
}

ModelRecord model_from_json(const nlohmann::json& j) {
  try {
    ModelSpec spec = spec_from_json(j.at("spec"));
    auto theta0 = j.at("theta0").get<std::vector<double>>();
    auto theta = j.at("theta").get<std::vector<double>>();
    return ModelRecord{NeuralModel(std::move(spec), std::move(theta0), std::move(theta)),
                       j.value("seeds", std::vector<std::uint64_t>{}),
                       j.value("train_config_digest", std::string{})};
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what(), 0);
  }
}

void save_model(const ModelRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << to_json(rec).dump() << '\n';
}

ModelRecord load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what(), 0);
  }
  return model_from_json(j);
}

}  // namespace merkit::nn
