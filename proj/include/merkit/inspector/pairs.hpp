#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "merkit/data/fixtures.hpp"
#include "merkit/linalg/dense_matrix.hpp"
#include "merkit/risk/risk.hpp"

namespace merkit::inspector {

using linalg::DenseMatrix;
using linalg::Vector;
using risk::RiskVector;

/// A model with its risk metrics and measured attack fidelity. Pairs are only
/// formed between models sharing a dataset id; group decides intra/inter.
struct MeasuredModel {
  RiskVector risk;
  double fidelity = 0.0;
  std::string group;
};

/// vma rescaled to [0, 1]; mrc from the L=400 column (L=40 for CIFAR-100).
std::vector<MeasuredModel> from_fixtures(const std::vector<data::FixtureRow>& rows);

enum class Scope { kAll, kIntra, kInter };
enum class FeatureSet { kVma, kMrc, kBoth };

const char* to_string(Scope s) noexcept;
Scope scope_from_string(const std::string& s);
const char* to_string(FeatureSet f) noexcept;
FeatureSet feature_set_from_string(const std::string& s);

struct PairExample {
  std::size_t a = 0;
  std::size_t b = 0;
  RiskVector r_a;
  RiskVector r_b;
  /// (vma_A, mrc_A, vma_B, mrc_B, vma_A - vma_B, mrc_A - mrc_B) by default.
  Vector features;
  /// 0 when fidelity_A - fidelity_B > 0, else 1.
  int label = 0;
  bool intra_group = false;
  std::string dataset;
};

/// Metric columns of one side, in (vma, mrc) order restricted to the set.
Vector side_features(const RiskVector& r, FeatureSet set);
/// {r_A, r_B} or {r_A, r_B, r_A - r_B}.
Vector pair_features(const RiskVector& a, const RiskVector& b, FeatureSet set,
                     bool augment);

/// Every ordered pair of distinct models within each dataset, filtered by
/// scope. Throws DataError when a dataset has fewer than two models.
std::vector<PairExample> build_pairs(const std::vector<MeasuredModel>& models, Scope scope,
                                     FeatureSet set = FeatureSet::kBoth, bool augment = true);

/// Recomputes features in place for another feature set.
void refeaturize(std::vector<PairExample>& pairs, FeatureSet set, bool augment);

struct PairDatasetSplit {
  std::vector<PairExample> all;
  std::vector<PairExample> train;
  std::vector<PairExample> test;
};

/// Seeded permutation of the ordered examples; the test part gets
/// round(test_fraction * n).
PairDatasetSplit split_pairs(std::vector<PairExample> all, std::uint64_t seed,
                             double test_fraction = 0.2);

}  // namespace merkit::inspector
