#pragma once

#include <vector>

#include <json.hpp>

#include "merkit/data/dataset.hpp"
#include "merkit/ntk/ntk.hpp"

namespace merkit::risk {

struct BoundReport {
  double gamma = 0.0;
  double delta = 0.0;
  double empirical_margin_term = 0.0;
  double complexity_term = 0.0;
  double sample_term = 0.0;
  double total = 0.0;
  std::size_t m0 = 1;
  double kappa = 0.0;
  double trace_theta = 0.0;
  /// Fraction of samples whose surrogate margin against the victim label is <= 0.
  double empirical_gap = 0.0;
  /// Delta^T Theta^-1 Delta with the victim logit change.
  double quad_form = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
};

/// f_s[y_v] - max over other classes of f_s, on logits.
double surrogate_margin(const nn::NeuralModel& surrogate, std::span<const double> x,
                        std::size_t victim_label);

/// Fidelity-gap bound on the samples for one gamma. `ntk` must be assembled
/// over the same rows; its theta (clipped when clip_q is set) is inverted and
/// its unclipped trace enters the complexity term.
BoundReport fidelity_gap_bound(const nn::NeuralModel& victim, const nn::NeuralModel& surrogate,
                               const linalg::DenseMatrix& samples, double gamma, double delta,
                               const ntk::NtkMatrix& ntk);

/// Same for every gamma, sharing the gamma-independent work.
std::vector<BoundReport> fidelity_gap_bound_grid(const nn::NeuralModel& victim,
                                                 const nn::NeuralModel& surrogate,
                                                 const linalg::DenseMatrix& samples,
                                                 std::span<const double> gammas, double delta,
                                                 const ntk::NtkMatrix& ntk);

/// max(1, ceil(gamma sqrt(N) / (4 K sqrt(kappa))))
std::size_t bound_m0(double gamma, std::size_t n, std::size_t k, double kappa);

/// Eight points from 0.1 to 2.
std::vector<double> default_gamma_grid();
/// Index of the smallest total.
std::size_t tightest(const std::vector<BoundReport>& reports);

/// min(1, gap + victim_err); both inputs must lie in [0, 1].
double generalization_bound(double gap, double victim_err);

/// Empirical error terms on one labelled set, kept as counts so the check is exact.
struct ErrorDecomposition {
  std::size_t n = 0;
  std::size_t surrogate_wrong = 0;
  std::size_t disagree = 0;
  std::size_t victim_wrong = 0;

  double surrogate_error() const noexcept { return frac(surrogate_wrong); }
  double gap() const noexcept { return frac(disagree); }
  double victim_error() const noexcept { return frac(victim_wrong); }
  bool holds() const noexcept { return surrogate_wrong <= disagree + victim_wrong; }

 private:
  double frac(std::size_t c) const noexcept {
    return n == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(n);
  }
};

ErrorDecomposition decompose_errors(const nn::NeuralModel& victim,
                                    const nn::NeuralModel& surrogate,
                                    const data::Dataset& eval_set);

nlohmann::json to_json(const BoundReport& r);

}  // namespace merkit::risk
