#include "merkit/data/fixtures.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "merkit/error.hpp"

namespace merkit::data {

namespace detail {
std::vector<std::string> split_csv_line(const std::string& line);
bool parse_double(const std::string& s, double& out);
}  // namespace detail

const char* to_string(ModelGroup g) noexcept {
  switch (g) {
    case ModelGroup::kResNet: return "ResNet";
    case ModelGroup::kWideResNet: return "WideResNet";
    case ModelGroup::kDenseNet: return "DenseNet";
    case ModelGroup::kLeViT: return "LeViT";
  }
  return "?";
}

ModelGroup group_of(const std::string& model) {
  if (model.starts_with("WideResNet")) return ModelGroup::kWideResNet;
  if (model.starts_with("ResNet")) return ModelGroup::kResNet;
  if (model.starts_with("DenseNet")) return ModelGroup::kDenseNet;
  if (model.starts_with("LeViT")) return ModelGroup::kLeViT;
  throw FixtureError("model '" + model + "' does not belong to a known architecture group");
}

const std::vector<std::string>& fixture_datasets() {
  static const std::vector<std::string> names{"cifar10", "stl10", "fashionmnist", "cifar100",
                                              "celeba"};
  return names;
}

std::vector<FixtureRow> load_fixture_file(const std::string& path, const std::string& dataset) {
  std::ifstream in(path);
  if (!in) throw FixtureError("missing fixture file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FixtureError("'" + path + "' is empty");
  const auto header = detail::split_csv_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FixtureError("'" + path + "' lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_model = col("model");
  const std::size_t c_params = col("n_params");
  const std::size_t c_vma = col("vma");
  const std::size_t c_acc = col("attack_accuracy");
  const std::size_t c_fid = col("fidelity");
  std::vector<std::pair<int, std::size_t>> mrc_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].starts_with("mrc_L")) mrc_cols.emplace_back(std::stoi(header[c].substr(5)), c);
  }
  if (mrc_cols.empty()) throw FixtureError("'" + path + "' has no mrc_L columns");

  std::vector<FixtureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) throw FixtureError(where + ": wrong cell count");
    auto num = [&](std::size_t c) {
      double v = 0.0;
      if (!detail::parse_double(cells[c], v)) {
        throw FixtureError(where + ": non-numeric '" + cells[c] + "'");
      }
      return v;
    };
    FixtureRow r;
    r.dataset = dataset;
    r.model = cells[c_model];
    r.group = group_of(r.model);
    r.n_params = static_cast<std::size_t>(num(c_params));
    r.vma = num(c_vma);
    r.attack_accuracy = num(c_acc);
    r.fidelity = num(c_fid);
    for (const auto& [l, c] : mrc_cols) r.mrc[l] = num(c);
    if (r.fidelity < 0.0 || r.fidelity > 1.0) throw FixtureError(where + ": fidelity outside [0,1]");
    if (r.vma < 0.0 || r.vma > 100.0) throw FixtureError(where + ": vma outside [0,100]");
    for (const auto& [l, v] : r.mrc) {
      if (v < 0.0) throw FixtureError(where + ": negative mrc");
    }
    rows.push_back(std::move(r));
  }
  if (rows.size() != 16) {
    throw FixtureError("'" + path + "' holds " + std::to_string(rows.size()) +
                       " rows, expected 16");
  }
  return rows;
}

std::vector<FixtureRow> load_fixtures(const std::string& dir) {
  std::vector<FixtureRow> all;
  for (const auto& name : fixture_datasets()) {
    auto rows = load_fixture_file(dir + "/" + name + ".csv", name);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

double primary_mrc(const FixtureRow& row) {
  if (const auto it = row.mrc.find(400); it != row.mrc.end()) return it->second;
  if (const auto it = row.mrc.find(40); it != row.mrc.end()) return it->second;
  throw FixtureError("row " + row.dataset + "/" + row.model + " has neither L=400 nor L=40");
}

}  // namespace merkit::data
