#include "merkit/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "merkit/digest.hpp"
#include "merkit/error.hpp"
#include "merkit/ntk/ntk.hpp"

namespace merkit::cli {

namespace pt = boost::property_tree;

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, cfg);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), e.line());
  }
  return cfg;
}

std::string canonical(const Config& cfg) {
  std::set<std::string> lines;
  for (const auto& [section, body] : cfg) {
    if (body.empty()) {
      lines.insert(section + "=" + body.data());
      continue;
    }
    for (const auto& [key, value] : body) lines.insert(section + "." + key + "=" + value.data());
  }
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string digest(const Config& cfg) { return sha256_hex(canonical(cfg)); }

namespace {

template <typename T>
T convert(const std::string& where, const std::string& raw) {
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1" || raw == "yes") return true;
      if (raw == "false" || raw == "0" || raw == "no") return false;
      throw std::invalid_argument(raw);
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } else {
      std::size_t used = 0;
      if (!raw.empty() && raw[0] == '-') throw std::invalid_argument(raw);
      const unsigned long long v = std::stoull(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return static_cast<T>(v);
    }
  } catch (const std::logic_error&) {
    throw ParameterError(where + " = '" + raw + "' is not a valid value");
  }
}

class Section {
 public:
  Section(const Config& cfg, const std::string& name, std::set<std::string> allowed)
      : name_(name) {
    if (const auto child = cfg.get_child_optional(name)) node_ = &*child;
    if (!node_) return;
    for (const auto& [key, value] : *node_) {
      if (!allowed.contains(key)) {
        throw ParameterError("unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

  bool has(const std::string& key) const { return node_ && node_->get_child_optional(key); }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return convert<T>("[" + name_ + "] " + key, node_->get<std::string>(key));
  }

  /// Comma-separated values.
  template <typename T>
  std::vector<T> list(const std::string& key, std::vector<T> fallback) const {
    if (!has(key)) return fallback;
    std::vector<T> out;
    std::stringstream ss(node_->get<std::string>(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto e = item.find_last_not_of(" \t");
      out.push_back(convert<T>("[" + name_ + "] " + key, item.substr(b, e - b + 1)));
    }
    return out;
  }

 private:
  std::string name_;
  const Config* node_ = nullptr;
};

}  // namespace

nn::ModelSpec model_spec_from(const Config& cfg, const std::string& section) {
  const Section s(cfg, section, {"input_dim", "layer_widths", "num_classes", "activation",
                                 "init_seed", "init_scale", "bias"});
  nn::ModelSpec spec;
  spec.input_dim = s.get<std::size_t>("input_dim", 0);
  spec.layer_widths = s.list<std::size_t>("layer_widths", {64});
  spec.num_classes = s.get<std::size_t>("num_classes", 0);
  spec.activation = nn::activation_from_string(s.get<std::string>("activation", "relu"));
  spec.init_seed = s.get<std::uint64_t>("init_seed", 0);
  spec.init_scale = s.get<double>("init_scale", 1.0);
  spec.bias = s.get<bool>("bias", true);
  return spec;
}

nn::TrainConfig train_config_from(const Config& cfg, const std::string& section) {
  const Section s(cfg, section,
                  {"optimizer", "learning_rate", "epochs", "batch_size", "momentum",
                   "weight_decay", "loss", "seed", "adversarial", "pgd_epsilon", "pgd_step_size",
                   "pgd_steps"});
  nn::TrainConfig c;
  c.optimizer = nn::optimizer_from_string(s.get<std::string>("optimizer", "sgd"));
  c.learning_rate = s.get<double>("learning_rate", c.learning_rate);
  c.epochs = s.get<std::size_t>("epochs", c.epochs);
  c.batch_size = s.get<std::size_t>("batch_size", c.batch_size);
  c.momentum = s.get<double>("momentum", c.momentum);
  c.weight_decay = s.get<double>("weight_decay", c.weight_decay);
  c.loss = nn::loss_from_string(s.get<std::string>("loss", "cross_entropy"));
  c.seed = s.get<std::uint64_t>("seed", c.seed);
  if (s.get<bool>("adversarial", false)) {
    nn::AdversarialConfig a;
    a.epsilon = s.get<double>("pgd_epsilon", a.epsilon);
    a.step_size = s.get<double>("pgd_step_size", a.step_size);
    a.steps = s.get<std::size_t>("pgd_steps", a.steps);
    c.adversarial = a;
  }
  c.validate();
  return c;
}

risk::MrcConfig mrc_config_from(const Config& cfg, std::size_t pool_size,
                                const std::string& section) {
  const Section s(cfg, section, {"L", "eta", "q", "output_space", "eval_point"});
  risk::MrcConfig c = risk::default_mrc_config(pool_size);
  c.L = s.get<std::size_t>("L", c.L);
  c.eta = s.get<double>("eta", c.eta);
  c.q = s.get<double>("q", c.q);
  c.output_space = nn::output_space_from_string(s.get<std::string>("output_space", "probabilities"));
  c.eval_point = ntk::eval_point_from_string(s.get<std::string>("eval_point", "trained"));
  c.validate();
  return c;
}

extraction::AttackConfig attack_config_from(const Config& cfg, const std::string& section) {
  const Section s(cfg, section, {"strategy", "budget", "rounds", "oracle_mode", "jbda_step",
                                 "shared_init", "start_from_victim", "seed"});
  extraction::AttackConfig c;
  c.strategy = extraction::strategy_from_string(s.get<std::string>("strategy", "full"));
  c.budget = s.get<std::size_t>("budget", c.budget);
  c.rounds = s.get<std::size_t>("rounds", c.rounds);
  c.oracle_mode = extraction::oracle_mode_from_string(s.get<std::string>("oracle_mode", "probabilities"));
  c.jbda_step = s.get<double>("jbda_step", c.jbda_step);
  c.shared_init = s.get<bool>("shared_init", c.shared_init);
  c.start_from_victim = s.get<bool>("start_from_victim", c.start_from_victim);
  c.seed = s.get<std::uint64_t>("seed", c.seed);
  c.surrogate_train = train_config_from(cfg, "surrogate_train");
  c.validate();
  return c;
}

BoundConfig bound_config_from(const Config& cfg, const std::string& section) {
  const Section s(cfg, section, {"gammas", "delta", "clip_q", "clip", "eval_point"});
  BoundConfig c;
  c.gammas = s.list<double>("gammas", {0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0});
  c.delta = s.get<double>("delta", c.delta);
  c.clip_q = s.get<double>("clip_q", c.clip_q);
  c.clip = s.get<bool>("clip", c.clip);
  c.eval_point = ntk::eval_point_from_string(s.get<std::string>("eval_point", "init"));
  if (c.gammas.empty()) throw ParameterError("[bound] gammas must not be empty");
  return c;
}

DataConfig data_config_from(const Config& cfg, const std::string& section) {
  const Section s(cfg, section, {"generator", "n", "dim", "classes", "spread", "noise", "seed",
                                 "test_fraction", "split_seed"});
  DataConfig c;
  c.generator = s.get<std::string>("generator", c.generator);
  c.n = s.get<std::size_t>("n", c.n);
  c.dim = s.get<std::size_t>("dim", c.dim);
  c.classes = s.get<std::size_t>("classes", c.classes);
  c.spread = s.get<double>("spread", c.spread);
  c.noise = s.get<double>("noise", c.noise);
  c.seed = s.get<std::uint64_t>("seed", c.seed);
  c.test_fraction = s.get<double>("test_fraction", c.test_fraction);
  c.split_seed = s.get<std::uint64_t>("split_seed", c.split_seed);
  return c;
}

data::Dataset generate(const DataConfig& c) {
  if (c.generator == "blobs") return data::make_blobs(c.n, c.dim, c.classes, c.spread, c.seed);
  if (c.generator == "moons") return data::make_moons(c.n, c.noise, c.seed);
  if (c.generator == "rings") return data::make_rings(c.n, c.classes, c.noise, c.seed);
  throw ParameterError("unknown generator '" + c.generator + "' (expected blobs, moons or rings)");
}

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"command", m.command},
                        {"config_digest", m.config_digest},
                        {"seeds", m.seeds},
                        {"inputs", m.inputs},
                        {"outputs", m.outputs},
                        {"started", m.started},
                        {"finished", m.finished},
                        {"tool_version", m.tool_version}};
}

std::string write_manifest(const RunManifest& m, const std::string& primary_output) {
  const std::string path = primary_output + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << to_json(m).dump(2) << '\n';
  return path;
}

}  // namespace merkit::cli
