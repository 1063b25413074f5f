#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "merkit/data/dataset.hpp"
#include "merkit/ntk/ntk.hpp"

namespace merkit::risk {

using linalg::DenseMatrix;
using linalg::Vector;
using nn::NeuralModel;

struct MrcConfig {
  std::size_t L = 400;
  double eta = 0.5;
  double q = 0.5;
  nn::OutputSpace output_space = nn::OutputSpace::kProbabilities;
  nn::At eval_point = nn::At::kCurrent;

  void validate() const;
  /// round(eta * L)
  std::size_t hard_count() const;
  std::string canonical() const;
};

/// Defaults with L reduced to the pool size when the pool is smaller than 400.
MrcConfig default_mrc_config(std::size_t pool_size);

/// round(eta*L) indices with the largest margins (descending), then L minus
/// that many with the smallest margins among the rest (ascending). Ties go to
/// the lower index.
std::vector<std::size_t> select_samples(std::span<const double> margins, std::size_t L,
                                        double eta);
/// Margins are the victim's top-1 minus top-2 probability.
std::vector<std::size_t> select_samples(const NeuralModel& victim, const data::Dataset& pool,
                                        std::size_t L, double eta);

struct MrcDetail {
  double value = 0.0;
  std::vector<std::size_t> selected;
  /// Output change over the selected samples, sample-major.
  Vector delta;
  /// Smallest kernel eigenvalue before clipping.
  double raw_min_eigenvalue = 0.0;
  double raw_trace = 0.0;
};

MrcDetail mrc_detail(const NeuralModel& victim, const data::Dataset& pool, const MrcConfig& cfg);
double mrc(const NeuralModel& victim, const data::Dataset& pool, const MrcConfig& cfg);

double vma(const NeuralModel& victim, const data::Dataset& test_set);

struct RiskVector {
  double vma = 0.0;
  double mrc = 0.0;
  std::string model_id;
  std::string dataset_id;

  friend bool operator==(const RiskVector&, const RiskVector&) = default;
};

nlohmann::json to_json(const RiskVector& r);
RiskVector risk_vector_from_json(const nlohmann::json& j);
/// One JSON object per line.
void write_jsonl(const std::vector<RiskVector>& rows, const std::string& path);
std::vector<RiskVector> read_jsonl(const std::string& path);

}  // namespace merkit::risk
