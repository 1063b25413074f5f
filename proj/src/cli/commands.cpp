#include "merkit/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "merkit/cli/config.hpp"
#include "merkit/data/fixtures.hpp"
#include "merkit/digest.hpp"
#include "merkit/extraction/attack.hpp"
#include "merkit/inspector/reports.hpp"
#include "merkit/inspector/stats.hpp"
#include "merkit/nn/serialize.hpp"
#include "merkit/risk/bounds.hpp"

namespace merkit::cli {

using nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kTraining: return 3;
    case ErrorKind::kSingularity:
    case ErrorKind::kCapacity: return 4;
    case ErrorKind::kFixture: return 5;
    default: return 2;
  }
}

namespace {

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ParameterError(std::string("missing required option ") + flag);
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (auto v : seeds) s += std::to_string(v) + ",";
  return s;
}

class ManifestScope {
 public:
  explicit ManifestScope(std::string command) {
    m_.command = std::move(command);
    m_.started = timestamp_now();
  }
  RunManifest& operator*() { return m_; }
  RunManifest* operator->() { return &m_; }
  void write(const std::string& primary) {
    m_.finished = timestamp_now();
    write_manifest(m_, primary);
  }

 private:
  RunManifest m_;
};

}  // namespace

json cmd_generate(const GenerateArgs& a) {
  require(a.config, "--config");
  require(a.out_prefix, "--out");
  ManifestScope man("generate");
  const Config cfg = load_config(a.config);
  const DataConfig dc = data_config_from(cfg);
  const data::Dataset all = generate(dc);
  const auto [train, test] = data::split(all, dc.test_fraction, dc.split_seed);
  const std::string train_path = a.out_prefix + "_train.csv";
  const std::string test_path = a.out_prefix + "_test.csv";
  data::write_csv(train, train_path);
  data::write_csv(test, test_path);
  man->config_digest = digest(cfg);
  man->seeds = {dc.seed, dc.split_seed};
  man->inputs = {a.config};
  man->outputs = {train_path, test_path};
  man.write(train_path);
  return json{{"train", train_path}, {"test", test_path}, {"n_train", train.size()},
              {"n_test", test.size()}, {"config_digest", man->config_digest}};
}

json cmd_train(const TrainArgs& a) {
  require(a.spec, "--spec");
  require(a.data, "--data");
  require(a.train_cfg, "--train-cfg");
  require(a.out, "--out");
  ManifestScope man("train");
  const Config spec_cfg = load_config(a.spec);
  const Config train_cfg = load_config(a.train_cfg);
  nn::ModelSpec spec = model_spec_from(spec_cfg);
  const nn::TrainConfig tc = train_config_from(train_cfg);
  const data::Dataset data = data::load_csv(a.data);
  if (spec.input_dim == 0) spec.input_dim = data.dim();
  if (spec.num_classes == 0) spec.num_classes = std::max<std::size_t>(2, data.num_classes);
  if (data.num_classes > spec.num_classes) {
    throw ParameterError("data has " + std::to_string(data.num_classes) +
                         " classes but the model only " + std::to_string(spec.num_classes));
  }
  nn::NeuralModel model(spec);
  nn::TrainReport report;
  try {
    report = nn::train(model, data, tc);
  } catch (const TrainingError&) {
    throw;
  } catch (const Error& e) {
    throw TrainingError(std::string("training failed: ") + e.what());
  }
  nn::ModelRecord rec{model, {spec.init_seed, tc.seed}, sha256_hex(tc.canonical())};
  nn::save_model(rec, a.out);
  man->config_digest = sha256_hex(canonical(spec_cfg) + canonical(train_cfg));
  man->seeds = rec.seeds;
  man->inputs = {a.spec, a.data, a.train_cfg};
  man->outputs = {a.out};
  man.write(a.out);
  return json{{"model", a.out},
              {"param_count", model.param_count()},
              {"final_accuracy", report.final_accuracy},
              {"final_loss", report.loss_curve.back()},
              {"config_digest", man->config_digest}};
}

json cmd_assess(const AssessArgs& a) {
  require(a.victim, "--victim");
  require(a.pool, "--pool");
  require(a.test, "--test");
  require(a.out, "--out");
  ManifestScope man("assess");
  const nn::ModelRecord victim = nn::load_model(a.victim);
  const data::Dataset pool = data::load_csv(a.pool);
  const data::Dataset test = data::load_csv(a.test);
  const Config cfg = a.mrc_cfg.empty() ? Config{} : load_config(a.mrc_cfg);
  const risk::MrcConfig mc = mrc_config_from(cfg, pool.size());
  const risk::MrcDetail detail = risk::mrc_detail(victim.model, pool, mc);
  const risk::RiskVector rv{risk::vma(victim.model, test), detail.value,
                            a.model_id.empty() ? a.victim : a.model_id,
                            a.dataset_id.empty() ? a.pool : a.dataset_id};
  json out = risk::to_json(rv);
  out["config_digest"] = sha256_hex(mc.canonical());
  out["L"] = mc.L;
  out["eta"] = mc.eta;
  out["q"] = mc.q;
  out["output_space"] = nn::to_string(mc.output_space);
  out["eval_point"] = ntk::eval_point_name(mc.eval_point);
  out["raw_min_eigenvalue"] = detail.raw_min_eigenvalue;
  {
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write '" + a.out + "'");
    f << out.dump() << '\n';
  }
  man->config_digest = out["config_digest"];
  man->seeds = victim.seeds;
  man->inputs = {a.victim, a.pool, a.test};
  if (!a.mrc_cfg.empty()) man->inputs.push_back(a.mrc_cfg);
  man->outputs = {a.out};
  man.write(a.out);
  return out;
}

json cmd_bound(const BoundArgs& a) {
  require(a.victim, "--victim");
  require(a.surrogate, "--surrogate");
  require(a.samples, "--samples");
  require(a.out, "--out");
  ManifestScope man("bound");
  const nn::ModelRecord victim = nn::load_model(a.victim);
  const nn::ModelRecord surrogate = nn::load_model(a.surrogate);
  const data::Dataset samples = data::load_csv(a.samples);
  const Config cfg = a.bound_cfg.empty() ? Config{} : load_config(a.bound_cfg);
  const BoundConfig bc = bound_config_from(cfg);
  const ntk::NtkMatrix k =
      ntk::assemble(victim.model, samples.features, bc.eval_point,
                    bc.clip ? std::optional<double>(bc.clip_q) : std::nullopt);
  const auto reports = risk::fidelity_gap_bound_grid(victim.model, surrogate.model,
                                                     samples.features, bc.gammas, bc.delta, k);
  json rows = json::array();
  for (const auto& r : reports) rows.push_back(risk::to_json(r));
  const json out{{"reports", rows},
                 {"tightest", risk::tightest(reports)},
                 {"config_digest", digest(cfg)}};
  write_json(out, a.out);
  man->config_digest = digest(cfg);
  man->inputs = {a.victim, a.surrogate, a.samples};
  man->outputs = {a.out};
  man.write(a.out);
  return out;
}

json cmd_attack(const AttackArgs& a) {
  require(a.victim, "--victim");
  require(a.pool, "--pool");
  require(a.attack_cfg, "--attack-cfg");
  require(a.out, "--out");
  ManifestScope man("attack");
  const nn::ModelRecord victim = nn::load_model(a.victim);
  const data::Dataset pool = data::load_csv(a.pool);
  const data::Dataset eval = a.eval.empty() ? pool : data::load_csv(a.eval);
  const Config cfg = load_config(a.attack_cfg);
  const extraction::AttackConfig ac = attack_config_from(cfg);
  const extraction::AttackResult result = extraction::run_attack(victim.model, pool, ac, eval);
  const json out = extraction::report_json(result, ac);
  write_json(out, a.out);
  man->outputs = {a.out};
  if (!a.surrogate_out.empty()) {
    nn::save_model({result.surrogate, {ac.seed, ac.surrogate_train.seed},
                    sha256_hex(ac.surrogate_train.canonical())},
                   a.surrogate_out);
    man->outputs.push_back(a.surrogate_out);
  }
  man->config_digest = out["config_digest"];
  man->seeds = {ac.seed, ac.surrogate_train.seed};
  man->inputs = {a.victim, a.pool, a.attack_cfg};
  if (!a.eval.empty()) man->inputs.push_back(a.eval);
  man.write(a.out);
  return out;
}

std::vector<inspector::MeasuredModel> load_models(const ModelSource& src) {
  if (src.fixtures_dir.empty() == src.measured.empty()) {
    throw ParameterError("give exactly one of --fixtures-dir or --measured");
  }
  if (!src.fixtures_dir.empty()) return inspector::from_fixtures(data::load_fixtures(src.fixtures_dir));
  std::ifstream in(src.measured);
  if (!in) throw DataError("cannot open '" + src.measured + "'");
  std::vector<inspector::MeasuredModel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      inspector::MeasuredModel m;
      m.risk = risk::risk_vector_from_json(j);
      m.fidelity = j.at("fidelity").get<double>();
      m.group = j.value("group", std::string{});
      out.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw ParseError(std::string("measured row: ") + e.what(), lineno);
    }
  }
  return out;
}

void write_measured(const std::vector<inspector::MeasuredModel>& models, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& m : models) {
    json j = risk::to_json(m.risk);
    j["fidelity"] = m.fidelity;
    j["group"] = m.group;
    out << j.dump() << '\n';
  }
}

namespace {

std::string source_digest(const ModelSource& s, const std::string& extra) {
  return sha256_hex("fixtures=" + s.fixtures_dir + "\nmeasured=" + s.measured + "\n" + extra);
}

std::vector<std::string> source_inputs(const ModelSource& s) {
  return {s.fixtures_dir.empty() ? s.measured : s.fixtures_dir};
}

}  // namespace

json cmd_pairs(const PairsArgs& a) {
  require(a.out, "--out");
  ManifestScope man("pairs");
  const auto models = load_models(a.source);
  const auto set = inspector::feature_set_from_string(a.features);
  const auto split = inspector::split_pairs(
      inspector::build_pairs(models, inspector::scope_from_string(a.scope), set, a.augment),
      a.seed);
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(a.out.c_str(), "w"), &std::fclose);
  if (!f) throw DataError("cannot write '" + a.out + "'");
  const std::size_t width = split.all.front().features.size();
  std::fprintf(f.get(), "split,dataset,model_a,model_b,intra_group,label");
  for (std::size_t j = 0; j < width; ++j) std::fprintf(f.get(), ",f%zu", j);
  std::fprintf(f.get(), "\n");
  std::size_t zeros = 0;
  for (const auto* part : {&split.train, &split.test}) {
    const char* name = part == &split.train ? "train" : "test";
    for (const auto& p : *part) {
      std::fprintf(f.get(), "%s,%s,%s,%s,%d,%d", name, p.dataset.c_str(), p.r_a.model_id.c_str(),
                   p.r_b.model_id.c_str(), p.intra_group ? 1 : 0, p.label);
      for (double v : p.features) std::fprintf(f.get(), ",%.17g", v);
      std::fprintf(f.get(), "\n");
      zeros += p.label == 0;
    }
  }
  f.reset();
  const std::string d =
      source_digest(a.source, "scope=" + a.scope + "\nfeatures=" + a.features +
                                  "\naugment=" + std::to_string(a.augment) + "\nseed=" +
                                  std::to_string(a.seed) + "\n");
  man->config_digest = d;
  man->seeds = {a.seed};
  man->inputs = source_inputs(a.source);
  man->outputs = {a.out};
  man.write(a.out);
  return json{{"count", split.all.size()},
              {"train", split.train.size()},
              {"test", split.test.size()},
              {"label0_fraction",
               static_cast<double>(zeros) / static_cast<double>(split.all.size())},
              {"config_digest", d}};
}

json cmd_inspect(const InspectArgs& a) {
  require(a.out, "--out");
  if (a.seeds.empty()) throw ParameterError("--seeds must name at least one seed");
  ManifestScope man("inspect");
  const auto models = load_models(a.source);
  const auto set = inspector::feature_set_from_string(a.features);
  const auto pairs =
      inspector::build_pairs(models, inspector::scope_from_string(a.scope), set, a.augment);
  std::vector<double> per_seed;
  for (auto seed : a.seeds) {
    const auto split = inspector::split_pairs(pairs, seed);
    inspector::ComparatorConfig cc;
    cc.epochs = a.epochs;
    cc.seed = seed;
    per_seed.push_back(inspector::cacc(inspector::train_comparator(split.train, cc), split.test));
  }
  const std::string d = source_digest(
      a.source, "scope=" + a.scope + "\nfeatures=" + a.features + "\naugment=" +
                    std::to_string(a.augment) + "\nepochs=" + std::to_string(a.epochs) +
                    "\nseeds=" + seeds_text(a.seeds) + "\n");
  const json out{{"scope", a.scope},
                 {"features", a.features},
                 {"augment", a.augment},
                 {"epochs", a.epochs},
                 {"seeds", a.seeds},
                 {"cacc_per_seed", per_seed},
                 {"cacc_mean", inspector::mean(per_seed)},
                 {"cacc_sd", inspector::stddev(per_seed)},
                 {"config_digest", d}};
  write_json(out, a.out);
  man->config_digest = d;
  man->seeds = a.seeds;
  man->inputs = source_inputs(a.source);
  man->outputs = {a.out};
  man.write(a.out);
  return out;
}

json cmd_reproduce_table1(const Table1Args& a) {
  require(a.fixtures_dir, "--fixtures-dir");
  require(a.out_dir, "--out");
  ManifestScope man("reproduce-table1");
  const auto models = inspector::from_fixtures(data::load_fixtures(a.fixtures_dir));
  inspector::ComparatorConfig cc;
  cc.epochs = a.epochs;
  const auto cells = inspector::reproduce_table1(models, a.seeds, cc);
  std::filesystem::create_directories(a.out_dir);
  const std::string csv = a.out_dir + "/table1.csv";
  const std::string js = a.out_dir + "/table1.json";
  inspector::write_table1_csv(cells, csv);
  const std::string d = sha256_hex("epochs=" + std::to_string(a.epochs) +
                                   "\nseeds=" + seeds_text(a.seeds) + "\n");
  const json out{{"cells", inspector::table1_json(cells)}, {"config_digest", d}};
  write_json(out, js);
  man->config_digest = d;
  man->seeds = a.seeds;
  man->inputs = {a.fixtures_dir};
  man->outputs = {csv, js};
  man.write(csv);
  return out;
}

json cmd_stats(const StatsArgs& a) {
  require(a.out_dir, "--out");
  ManifestScope man("stats");
  const auto models = load_models(a.source);
  const auto report = inspector::metric_report(models);
  std::filesystem::create_directories(a.out_dir);
  const std::string csv = a.out_dir + "/metrics.csv";
  const std::string scatter = a.out_dir + "/scatter.csv";
  inspector::write_metric_csv(report, csv);
  inspector::write_scatter(models, scatter);
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"dataset", r.dataset}, {"group", r.group}, {"n", r.n},
                    {"pcc_mrc", r.pcc_mrc}, {"krc_mrc", r.krc_mrc},
                    {"pcc_vma", r.pcc_vma}, {"krc_vma", r.krc_vma}});
  }
  man->config_digest = source_digest(a.source, "");
  man->inputs = source_inputs(a.source);
  man->outputs = {csv, scatter};
  man.write(csv);
  return json{{"rows", rows}, {"warnings", report.warnings}};
}

json cmd_fixtures_check(const std::string& fixtures_dir) {
  require(fixtures_dir, "--fixtures-dir");
  const auto rows = data::load_fixtures(fixtures_dir);
  const auto models = inspector::from_fixtures(rows);
  const std::size_t all = inspector::build_pairs(models, inspector::Scope::kAll).size();
  const std::size_t intra = inspector::build_pairs(models, inspector::Scope::kIntra).size();
  const std::size_t inter = inspector::build_pairs(models, inspector::Scope::kInter).size();
  if (rows.size() != 80 || all != 1200 || intra != 270 || inter != 930) {
    throw FixtureError("fixture counts " + std::to_string(rows.size()) + " rows, " +
                       std::to_string(all) + "/" + std::to_string(intra) + "/" +
                       std::to_string(inter) + " pairs; expected 80 rows, 1200/270/930 pairs");
  }
  return json{{"rows", rows.size()},
              {"datasets", data::fixture_datasets()},
              {"pairs_all", all},
              {"pairs_intra", intra},
              {"pairs_inter", inter}};
}

}  // namespace merkit::cli
