#include "merkit/risk/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "merkit/error.hpp"
#include "merkit/extraction/kernel_extract.hpp"
#include "merkit/linalg/decompositions.hpp"
#include "merkit/parallel.hpp"

namespace merkit::risk {

double surrogate_margin(const nn::NeuralModel& surrogate, std::span<const double> x,
                        std::size_t victim_label) {
  const linalg::Vector f = nn::forward(surrogate, x);
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < f.size(); ++a) {
    if (a != victim_label) other = std::max(other, f[a]);
  }
  return f.at(victim_label) - other;
}

std::vector<BoundReport> fidelity_gap_bound_grid(const nn::NeuralModel& victim,
                                                 const nn::NeuralModel& surrogate,
                                                 const linalg::DenseMatrix& samples,
                                                 std::span<const double> gammas, double delta,
                                                 const ntk::NtkMatrix& ntk) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  for (double g : gammas) {
    if (!(g > 0.0)) throw ParameterError("gamma must be > 0");
  }
  const std::size_t n = samples.rows();
  const std::size_t k = victim.num_classes();
  if (ntk.n != n || ntk.k != k) {
    throw DimensionError("NTK was assembled over " + std::to_string(ntk.n) + " samples with K=" +
                         std::to_string(ntk.k) + ", bound evaluated on " + std::to_string(n) +
                         " with K=" + std::to_string(k));
  }

  const linalg::Vector d = extraction::output_change(victim, samples, nn::OutputSpace::kLogits);
  const double quad = linalg::dot(d, linalg::solve_spd(ntk.theta, d));
  const double kap = ntk::kappa(victim, samples, ntk.eval_point);
  const double tr = ntk::trace(ntk);

  linalg::Vector margin(n);
  parallel_for(n, [&](std::size_t i) {
    margin[i] = surrogate_margin(surrogate, samples.row(i), nn::predict(victim, samples.row(i)));
  });
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const auto gap_count = std::count_if(margin.begin(), margin.end(), [](double m) { return m <= 0.0; });

  std::vector<BoundReport> out;
  for (double gamma : gammas) {
    BoundReport r;
    r.gamma = gamma;
    r.delta = delta;
    r.n = n;
    r.k = k;
    r.kappa = kap;
    r.trace_theta = tr;
    r.quad_form = quad;
    const auto below =
        std::count_if(margin.begin(), margin.end(), [&](double m) { return m <= gamma; });
    r.empirical_margin_term = static_cast<double>(below) / nd;
    r.empirical_gap = static_cast<double>(gap_count) / nd;
    r.complexity_term = 4.0 * kd * quad / (gamma * nd) * std::sqrt(std::max(tr, 0.0));
    r.m0 = bound_m0(gamma, n, k, kap);
    r.sample_term = 3.0 * std::sqrt(std::log(2.0 * static_cast<double>(r.m0) / delta) / (2.0 * nd));
    r.total = r.empirical_margin_term + r.complexity_term + r.sample_term;
    out.push_back(r);
  }
  return out;
}

BoundReport fidelity_gap_bound(const nn::NeuralModel& victim, const nn::NeuralModel& surrogate,
                               const linalg::DenseMatrix& samples, double gamma, double delta,
                               const ntk::NtkMatrix& ntk) {
  const double g[] = {gamma};
  return fidelity_gap_bound_grid(victim, surrogate, samples, g, delta, ntk).front();
}

std::size_t bound_m0(double gamma, std::size_t n, std::size_t k, double kappa) {
  const double m0 = std::ceil(gamma * std::sqrt(static_cast<double>(n)) /
                              (4.0 * static_cast<double>(k) * std::sqrt(kappa)));
  return static_cast<std::size_t>(std::max(1.0, m0));
}

std::vector<double> default_gamma_grid() { return {0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0}; }

std::size_t tightest(const std::vector<BoundReport>& reports) {
  if (reports.empty()) throw DataError("no bound reports");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].total < reports[best].total) best = i;
  }
  return best;
}

double generalization_bound(double gap, double victim_err) {
  if (!(gap >= 0.0 && gap <= 1.0) || !(victim_err >= 0.0 && victim_err <= 1.0)) {
    throw ParameterError("gap and victim error must lie in [0, 1]");
  }
  return std::min(1.0, gap + victim_err);
}

ErrorDecomposition decompose_errors(const nn::NeuralModel& victim,
                                    const nn::NeuralModel& surrogate,
                                    const data::Dataset& eval_set) {
  if (eval_set.size() == 0) throw DataError("error decomposition on an empty set");
  ErrorDecomposition e;
  e.n = eval_set.size();
  for (std::size_t i = 0; i < eval_set.size(); ++i) {
    const auto y = static_cast<std::size_t>(eval_set.labels[i]);
    const std::size_t pv = nn::predict(victim, eval_set.x(i));
    const std::size_t ps = nn::predict(surrogate, eval_set.x(i));
    e.surrogate_wrong += ps != y;
    e.victim_wrong += pv != y;
    e.disagree += ps != pv;
  }
  return e;
}

nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"gamma", r.gamma},
                        {"delta", r.delta},
                        {"empirical_margin_term", r.empirical_margin_term},
                        {"complexity_term", r.complexity_term},
                        {"sample_term", r.sample_term},
                        {"total", r.total},
                        {"m0", r.m0},
                        {"kappa", r.kappa},
                        {"trace_theta", r.trace_theta},
                        {"empirical_gap", r.empirical_gap},
                        {"quad_form", r.quad_form},
                        {"n", r.n},
                        {"k", r.k}};
}

}  // namespace merkit::risk
