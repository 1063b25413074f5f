#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "merkit/data/dataset.hpp"
#include "merkit/data/fixtures.hpp"
#include "merkit/error.hpp"

namespace merkit::data {

namespace detail {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) ++row;
  if (!in && line.find_first_not_of(" \t\r") == std::string::npos) {
    throw DataError("'" + path + "' is empty");
  }
  const auto header = detail::split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), schema.label_column);
  if (label_it == header.end()) {
    throw ParseError("missing label column '" + schema.label_column + "'", row);
  }
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != label_col) feature_cols.push_back(c);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw ParseError("missing feature column '" + name + "'", row);
      feature_cols.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (feature_cols.empty()) throw ParseError("no feature columns", row);

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row);
    }
    for (std::size_t c : feature_cols) {
      double v = 0.0;
      if (!detail::parse_double(cells[c], v)) {
        throw ParseError("non-numeric cell '" + cells[c] + "' in column '" + header[c] + "'", row);
      }
      values.push_back(v);
    }
    const std::string& lab = cells[label_col];
    int y = 0;
    const auto [ptr, ec] = std::from_chars(lab.data(), lab.data() + lab.size(), y);
    if (lab.empty() || ec != std::errc() || ptr != lab.data() + lab.size() || y < 0) {
      throw ParseError("label '" + lab + "' is not a non-negative integer", row);
    }
    labels.push_back(y);
  }
  if (labels.empty()) throw DataError("'" + path + "' has no data rows");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  const std::size_t n = labels.size();
  DenseMatrix features(n, feature_cols.size(), std::move(values));
  std::string name = path.substr(path.find_last_of('/') + 1);
  return make_dataset(std::move(features), std::move(labels),
                      std::max<std::size_t>(2, static_cast<std::size_t>(k)), name);
}

void write_csv(const Dataset& data, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw DataError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < data.dim(); ++j) std::fprintf(f.get(), "x%zu,", j);
  std::fprintf(f.get(), "label\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x(i)) std::fprintf(f.get(), "%.17g,", v);
    std::fprintf(f.get(), "%d\n", data.labels[i]);
  }
}

}  // namespace merkit::data
