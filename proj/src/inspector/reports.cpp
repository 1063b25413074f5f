#include "merkit/inspector/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include "merkit/error.hpp"
#include "merkit/inspector/stats.hpp"
#include "merkit/parallel.hpp"

namespace merkit::inspector {

namespace {

double safe(double (*fn)(std::span<const double>, std::span<const double>),
            const Vector& x, const Vector& y) {
  try {
    return fn(x, y);
  } catch (const DataError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

GroupStat stat_for(const std::string& dataset, const std::string& group,
                   const std::vector<const MeasuredModel*>& members) {
  Vector mrc;
  Vector vma;
  Vector fid;
  for (const auto* m : members) {
    mrc.push_back(m->risk.mrc);
    vma.push_back(m->risk.vma);
    fid.push_back(m->fidelity);
  }
  return GroupStat{dataset, group, members.size(), safe(&pcc, mrc, fid), safe(&krc, mrc, fid),
                   safe(&pcc, vma, fid), safe(&krc, vma, fid)};
}

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_out(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw DataError("cannot write '" + path + "'");
  return f;
}

}  // namespace

MetricReport metric_report(const std::vector<MeasuredModel>& models) {
  MetricReport report;
  std::vector<std::string> datasets;
  std::map<std::string, std::vector<std::string>> groups;
  std::map<std::pair<std::string, std::string>, std::vector<const MeasuredModel*>> members;
  std::map<std::string, std::vector<const MeasuredModel*>> per_dataset;
  for (const auto& m : models) {
    const auto& ds = m.risk.dataset_id;
    if (!per_dataset.contains(ds)) datasets.push_back(ds);
    per_dataset[ds].push_back(&m);
    auto& gs = groups[ds];
    if (std::find(gs.begin(), gs.end(), m.group) == gs.end()) gs.push_back(m.group);
    members[{ds, m.group}].push_back(&m);
  }
  for (const auto& ds : datasets) {
    for (const auto& g : groups[ds]) {
      const auto& mem = members[{ds, g}];
      if (mem.size() < 2) {
        report.warnings.push_back("skipping " + ds + "/" + g + ": fewer than two models");
        continue;
      }
      report.rows.push_back(stat_for(ds, g, mem));
    }
    if (per_dataset[ds].size() >= 2) report.rows.push_back(stat_for(ds, "overall", per_dataset[ds]));
  }
  if (datasets.size() > 1 && models.size() >= 2) {
    std::vector<const MeasuredModel*> all;
    for (const auto& m : models) all.push_back(&m);
    report.rows.push_back(stat_for("pooled", "overall", all));
  }
  return report;
}

void write_metric_csv(const MetricReport& report, const std::string& path) {
  auto f = open_out(path);
  std::fprintf(f.get(), "dataset,group,n,pcc_mrc,krc_mrc,pcc_vma,krc_vma\n");
  for (const auto& r : report.rows) {
    std::fprintf(f.get(), "%s,%s,%zu,%.6f,%.6f,%.6f,%.6f\n", r.dataset.c_str(), r.group.c_str(),
                 r.n, r.pcc_mrc, r.krc_mrc, r.pcc_vma, r.krc_vma);
  }
}

void write_scatter(const std::vector<MeasuredModel>& models, const std::string& path) {
  auto f = open_out(path);
  std::fprintf(f.get(), "metric,value,fidelity,dataset,model\n");
  for (const char* metric : {"vma", "mrc"}) {
    for (const auto& m : models) {
      const double v = metric[0] == 'v' ? m.risk.vma : m.risk.mrc;
      std::fprintf(f.get(), "%s,%.17g,%.17g,%s,%s\n", metric, v, m.fidelity,
                   m.risk.dataset_id.c_str(), m.risk.model_id.c_str());
    }
  }
}

std::vector<Table1Key> table1_layout() {
  std::vector<Table1Key> keys;
  const std::pair<Scope, bool> rows[] = {
      {Scope::kIntra, true}, {Scope::kInter, true}, {Scope::kAll, true}, {Scope::kAll, false}};
  for (const auto& [scope, augment] : rows) {
    for (FeatureSet fs : {FeatureSet::kVma, FeatureSet::kMrc, FeatureSet::kBoth}) {
      keys.push_back({scope, augment, fs});
    }
  }
  return keys;
}

std::vector<Table1Cell> reproduce_table1(const std::vector<MeasuredModel>& models,
                                         const std::vector<std::uint64_t>& seeds,
                                         const ComparatorConfig& cfg,
                                         const std::vector<Table1Key>& keys) {
  if (seeds.empty()) throw ParameterError("reproduce_table1 needs at least one seed");
  std::vector<Table1Cell> cells;
  std::map<Scope, std::vector<PairExample>> base;
  for (const auto& k : keys) {
    Table1Cell c;
    c.scope = k.scope;
    c.augment = k.augment;
    c.features = k.features;
    c.per_seed.assign(seeds.size(), 0.0);
    cells.push_back(std::move(c));
    if (!base.contains(k.scope)) base[k.scope] = build_pairs(models, k.scope);
  }

  const std::size_t jobs = cells.size() * seeds.size();
  parallel_for(jobs, [&](std::size_t job) {
    Table1Cell& cell = cells[job / seeds.size()];
    const std::size_t si = job % seeds.size();
    PairDatasetSplit split = split_pairs(base.at(cell.scope), seeds[si]);
    refeaturize(split.train, cell.features, cell.augment);
    refeaturize(split.test, cell.features, cell.augment);
    ComparatorConfig c = cfg;
    c.seed = seeds[si];
    cell.per_seed[si] = cacc(train_comparator(split.train, c), split.test);
  });
  for (auto& c : cells) {
    c.mean = mean(c.per_seed);
    c.sd = stddev(c.per_seed);
  }
  return cells;
}

const Table1Cell& find_cell(const std::vector<Table1Cell>& cells, Scope scope, bool augment,
                            FeatureSet features) {
  for (const auto& c : cells) {
    if (c.scope == scope && c.augment == augment && c.features == features) return c;
  }
  throw ParameterError("table cell not present");
}

namespace {

std::string row_name(Scope s, bool augment) {
  std::string name = s == Scope::kIntra ? "Intra-Group" : s == Scope::kInter ? "Inter-Group" : "All";
  if (!augment) name += " (w/o FA)";
  return name;
}

}  // namespace

void write_table1_csv(const std::vector<Table1Cell>& cells, const std::string& path) {
  auto f = open_out(path);
  std::fprintf(f.get(), "dataset,VMA,MRC,VMA+MRC\n");
  const std::pair<Scope, bool> rows[] = {
      {Scope::kIntra, true}, {Scope::kInter, true}, {Scope::kAll, true}, {Scope::kAll, false}};
  for (const auto& [scope, fa] : rows) {
    std::fprintf(f.get(), "%s", row_name(scope, fa).c_str());
    for (FeatureSet fs : {FeatureSet::kVma, FeatureSet::kMrc, FeatureSet::kBoth}) {
      const auto& c = find_cell(cells, scope, fa, fs);
      std::fprintf(f.get(), ",%.2f%% +/- %.2f", 100.0 * c.mean, 100.0 * c.sd);
    }
    std::fprintf(f.get(), "\n");
  }
}

nlohmann::json table1_json(const std::vector<Table1Cell>& cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cells) {
    out.push_back({{"scope", to_string(c.scope)},
                   {"augment", c.augment},
                   {"features", to_string(c.features)},
                   {"mean", c.mean},
                   {"sd", c.sd},
                   {"per_seed", c.per_seed}});
  }
  return out;
}

}  // namespace merkit::inspector
