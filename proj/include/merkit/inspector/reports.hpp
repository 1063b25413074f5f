#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "merkit/inspector/comparator.hpp"

namespace merkit::inspector {

/// Correlations of (MRC, fidelity) and (VMA, fidelity) inside one group of one
/// dataset; group "overall" pools every model of the dataset, dataset "pooled"
/// pools every dataset. NaN marks a correlation undefined on constant input.
struct GroupStat {
  std::string dataset;
  std::string group;
  std::size_t n = 0;
  double pcc_mrc = 0.0;
  double krc_mrc = 0.0;
  double pcc_vma = 0.0;
  double krc_vma = 0.0;
};

struct MetricReport {
  std::vector<GroupStat> rows;
  std::vector<std::string> warnings;
};

/// Per dataset: each group and the overall row, then a pooled row over all
/// models. Groups with fewer than two models are skipped with a warning.
MetricReport metric_report(const std::vector<MeasuredModel>& models);

void write_metric_csv(const MetricReport& report, const std::string& path);
/// Columns metric,value,fidelity,dataset,model for external plotting.
void write_scatter(const std::vector<MeasuredModel>& models, const std::string& path);

struct Table1Cell {
  Scope scope = Scope::kAll;
  bool augment = true;
  FeatureSet features = FeatureSet::kBoth;
  std::vector<double> per_seed;
  double mean = 0.0;
  double sd = 0.0;
};

struct Table1Key {
  Scope scope;
  bool augment;
  FeatureSet features;
};

/// Rows Intra, Inter, All (with FA) and All without FA, each for the VMA, MRC
/// and VMA+MRC feature sets.
std::vector<Table1Key> table1_layout();

/// Mean CAcc per requested cell over the seeds; cfg.seed is replaced by each
/// split seed.
std::vector<Table1Cell> reproduce_table1(const std::vector<MeasuredModel>& models,
                                         const std::vector<std::uint64_t>& seeds,
                                         const ComparatorConfig& cfg,
                                         const std::vector<Table1Key>& keys = table1_layout());
const Table1Cell& find_cell(const std::vector<Table1Cell>& cells, Scope scope, bool augment,
                            FeatureSet features);

/// One line per table row with "mean +/- sd" cells.
void write_table1_csv(const std::vector<Table1Cell>& cells, const std::string& path);
nlohmann::json table1_json(const std::vector<Table1Cell>& cells);

}  // namespace merkit::inspector
