#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "merkit/linalg/dense_matrix.hpp"

namespace merkit::data {

using linalg::DenseMatrix;

/// N x d features with dense labels in [0, K).
struct Dataset {
  DenseMatrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::string name;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  std::span<const double> x(std::size_t i) const noexcept { return features.row(i); }

  /// Throws DataError when N = 0, a label is out of range, shapes disagree or
  /// a feature is non-finite.
  void validate() const;

  Dataset subset(std::span<const std::size_t> indices) const;
};

Dataset make_dataset(DenseMatrix features, std::vector<int> labels, std::size_t num_classes,
                     std::string name);

/// Isotropic Gaussian blobs around seed-drawn centers; labels i % K.
Dataset make_blobs(std::size_t n, std::size_t dim, std::size_t num_classes, double spread,
                   std::uint64_t seed);
/// Two interleaved half circles on evenly spaced angles plus Gaussian noise.
Dataset make_moons(std::size_t n, double noise, std::uint64_t seed);
/// Concentric rings of radius 1..K with Gaussian radial noise.
Dataset make_rings(std::size_t n, std::size_t num_classes, double noise, std::uint64_t seed);

/// Seeded permutation split; the test part gets round(N * test_fraction)
/// samples, clamped so both parts are non-empty.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

struct CsvSchema {
  std::string label_column = "label";
  /// Empty means every column other than the label.
  std::vector<std::string> feature_columns;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
/// Header x0..x{d-1},label; values printed with round-trip precision.
void write_csv(const Dataset& data, const std::string& path);

}  // namespace merkit::data
