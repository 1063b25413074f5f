#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "merkit/cli/commands.hpp"
#include "merkit/cli/config.hpp"

namespace {

using nlohmann::json;
namespace mc = merkit::cli;

void add_source(CLI::App* sub, mc::ModelSource& src) {
  sub->add_option("--fixtures-dir", src.fixtures_dir, "directory of fixture CSVs");
  sub->add_option("--measured", src.measured, "JSONL of measured models");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model extraction risk toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mc::kToolVersion);

  // Required flags are checked inside the commands so every config problem
  // maps to the same exit code.
  mc::GenerateArgs gen;
  auto* s_gen = app.add_subcommand("generate", "write a synthetic train/test split");
  s_gen->add_option("--config", gen.config);
  s_gen->add_option("--out", gen.out_prefix, "output prefix");

  mc::TrainArgs train;
  auto* s_train = app.add_subcommand("train", "train a victim model");
  s_train->add_option("--spec", train.spec);
  s_train->add_option("--data", train.data);
  s_train->add_option("--train-cfg", train.train_cfg);
  s_train->add_option("--out", train.out);

  mc::AssessArgs assess;
  auto* s_assess = app.add_subcommand("assess", "compute VMA and MRC");
  s_assess->add_option("--victim", assess.victim);
  s_assess->add_option("--pool", assess.pool);
  s_assess->add_option("--test", assess.test);
  s_assess->add_option("--mrc-cfg", assess.mrc_cfg);
  s_assess->add_option("--out", assess.out);
  s_assess->add_option("--model-id", assess.model_id);
  s_assess->add_option("--dataset-id", assess.dataset_id);

  mc::BoundArgs bound;
  auto* s_bound = app.add_subcommand("bound", "evaluate the fidelity-gap bound");
  s_bound->add_option("--victim", bound.victim);
  s_bound->add_option("--surrogate", bound.surrogate);
  s_bound->add_option("--samples", bound.samples);
  s_bound->add_option("--bound-cfg", bound.bound_cfg);
  s_bound->add_option("--out", bound.out);

  mc::AttackArgs attack;
  auto* s_attack = app.add_subcommand("attack", "simulate an extraction attack");
  s_attack->add_option("--victim", attack.victim);
  s_attack->add_option("--pool", attack.pool);
  s_attack->add_option("--eval", attack.eval);
  s_attack->add_option("--attack-cfg", attack.attack_cfg);
  s_attack->add_option("--out", attack.out);
  s_attack->add_option("--surrogate-out", attack.surrogate_out);

  mc::PairsArgs pairs;
  auto* s_pairs = app.add_subcommand("pairs", "build comparator pair datasets");
  add_source(s_pairs, pairs.source);
  s_pairs->add_option("--scope", pairs.scope, "all, intra or inter");
  s_pairs->add_option("--features", pairs.features, "vma, mrc or vma+mrc");
  s_pairs->add_flag("!--no-fa", pairs.augment, "drop the r_A - r_B block");
  s_pairs->add_option("--seed", pairs.seed);
  s_pairs->add_option("--out", pairs.out);

  mc::InspectArgs inspect;
  auto* s_inspect = app.add_subcommand("inspect", "train and score the pairwise comparator");
  add_source(s_inspect, inspect.source);
  s_inspect->add_option("--scope", inspect.scope);
  s_inspect->add_option("--features", inspect.features);
  s_inspect->add_flag("!--no-fa", inspect.augment);
  s_inspect->add_option("--seeds", inspect.seeds)->delimiter(',');
  s_inspect->add_option("--epochs", inspect.epochs);
  s_inspect->add_option("--out", inspect.out);

  mc::Table1Args table1;
  auto* s_table1 = app.add_subcommand("reproduce-table1", "comparator accuracy table from fixtures");
  s_table1->add_option("--fixtures-dir", table1.fixtures_dir);
  s_table1->add_option("--seeds", table1.seeds)->delimiter(',');
  s_table1->add_option("--epochs", table1.epochs);
  s_table1->add_option("--out", table1.out_dir, "output directory");

  mc::StatsArgs stats;
  auto* s_stats = app.add_subcommand("stats", "PCC/KRC of risk metrics against fidelity");
  add_source(s_stats, stats.source);
  s_stats->add_option("--out", stats.out_dir, "output directory");

  std::string fixtures_dir;
  auto* s_fix = app.add_subcommand("fixtures-check", "validate fixture tables");
  s_fix->add_option("--fixtures-dir", fixtures_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json out;
    if (*s_gen) out = mc::cmd_generate(gen);
    else if (*s_train) out = mc::cmd_train(train);
    else if (*s_assess) out = mc::cmd_assess(assess);
    else if (*s_bound) out = mc::cmd_bound(bound);
    else if (*s_attack) out = mc::cmd_attack(attack);
    else if (*s_pairs) out = mc::cmd_pairs(pairs);
    else if (*s_inspect) out = mc::cmd_inspect(inspect);
    else if (*s_table1) out = mc::cmd_reproduce_table1(table1);
    else if (*s_stats) out = mc::cmd_stats(stats);
    else if (*s_fix) out = mc::cmd_fixtures_check(fixtures_dir);
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const merkit::Error& e) {
    std::cerr << "merkit: " << merkit::to_string(e.kind()) << ": " << e.what() << '\n';
    return mc::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "merkit: " << e.what() << '\n';
    return 1;
  }
}
