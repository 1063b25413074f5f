#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "merkit/data/dataset.hpp"
#include "merkit/error.hpp"

namespace merkit::data {

void Dataset::validate() const {
  if (labels.empty()) throw DataError("dataset '" + name + "' is empty");
  if (features.rows() != labels.size()) {
    throw DataError("dataset '" + name + "' has " + std::to_string(features.rows()) +
                    " feature rows but " + std::to_string(labels.size()) + " labels");
  }
  if (num_classes < 1) throw DataError("dataset '" + name + "' has no classes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                      " is outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  if (!features.all_finite()) throw DataError("dataset '" + name + "' has non-finite features");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = DenseMatrix(indices.size(), dim());
  out.labels.reserve(indices.size());
  out.num_classes = num_classes;
  out.name = name;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= size()) throw DataError("subset index " + std::to_string(i) + " out of range");
    std::copy(features.row(i).begin(), features.row(i).end(), out.features.row(r).begin());
    out.labels.push_back(labels[i]);
  }
  return out;
}

Dataset make_dataset(DenseMatrix features, std::vector<int> labels, std::size_t num_classes,
                     std::string name) {
  Dataset d{std::move(features), std::move(labels), num_classes, std::move(name)};
  d.validate();
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  if (n < 2) throw DataError("need at least 2 samples to split");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  const std::span<const std::size_t> all(order);
  Dataset train = data.subset(all.subspan(n_test));
  Dataset test = data.subset(all.first(n_test));
  train.name = data.name + ":train";
  test.name = data.name + ":test";
  return {std::move(train), std::move(test)};
}

}  // namespace merkit::data
