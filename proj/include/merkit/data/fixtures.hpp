#pragma once

#include <map>
#include <string>
#include <vector>

namespace merkit::data {

enum class ModelGroup { kResNet, kWideResNet, kDenseNet, kLeViT };

const char* to_string(ModelGroup g) noexcept;
/// Derived from the model-name prefix ("WideResNet22-2" -> kWideResNet).
ModelGroup group_of(const std::string& model);

/// One published result row. vma and attack_accuracy are percentages.
struct FixtureRow {
  std::string dataset;
  std::string model;
  ModelGroup group = ModelGroup::kResNet;
  std::size_t n_params = 0;
  double vma = 0.0;
  double attack_accuracy = 0.0;
  double fidelity = 0.0;
  std::map<int, double> mrc;
};

/// The five shipped table files in a fixed order.
const std::vector<std::string>& fixture_datasets();

/// Reads one table file; throws FixtureError unless it holds exactly 16 valid rows.
std::vector<FixtureRow> load_fixture_file(const std::string& path, const std::string& dataset);
/// All five tables from a directory, 80 rows in dataset order.
std::vector<FixtureRow> load_fixtures(const std::string& dir);

/// The MRC column used for risk comparison: L=400, or L=40 where 400 is absent.
double primary_mrc(const FixtureRow& row);

}  // namespace merkit::data
