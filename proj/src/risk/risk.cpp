#include "merkit/risk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "merkit/error.hpp"
#include "merkit/extraction/kernel_extract.hpp"
#include "merkit/linalg/decompositions.hpp"
#include "merkit/parallel.hpp"

namespace merkit::risk {

void MrcConfig::validate() const {
  if (L < 1) throw ParameterError("L must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
  if (!(q > 0.0) || !std::isfinite(q)) throw ParameterError("q must be positive");
}

std::size_t MrcConfig::hard_count() const {
  return std::min<std::size_t>(L, static_cast<std::size_t>(std::llround(eta * static_cast<double>(L))));
}

std::string MrcConfig::canonical() const {
  std::ostringstream s;
  s.precision(17);
  s << "L=" << L << "\neta=" << eta << "\neval_point=" << ntk::eval_point_name(eval_point)
    << "\noutput_space=" << nn::to_string(output_space) << "\nq=" << q << "\n";
  return s.str();
}

MrcConfig default_mrc_config(std::size_t pool_size) {
  MrcConfig c;
  c.L = std::max<std::size_t>(1, std::min<std::size_t>(c.L, pool_size));
  return c;
}

std::vector<std::size_t> select_samples(std::span<const double> margins, std::size_t L,
                                        double eta) {
  MrcConfig probe;
  probe.L = L;
  probe.eta = eta;
  probe.validate();
  if (L > margins.size()) {
    throw ParameterError("L = " + std::to_string(L) + " exceeds the pool size " +
                         std::to_string(margins.size()));
  }
  std::vector<std::size_t> order(margins.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return margins[a] > margins[b]; });
  const std::size_t n_large = probe.hard_count();
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_large));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(n_large), order.end());
  std::stable_sort(rest.begin(), rest.end(),
                   [&](std::size_t a, std::size_t b) { return margins[a] < margins[b]; });
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(L - n_large));
  return out;
}

std::vector<std::size_t> select_samples(const NeuralModel& victim, const data::Dataset& pool,
                                        std::size_t L, double eta) {
  Vector margins(pool.size());
  parallel_for(pool.size(), [&](std::size_t i) {
    margins[i] = nn::predict_margin(victim, pool.x(i), nn::OutputSpace::kProbabilities);
  });
  return select_samples(margins, L, eta);
}

MrcDetail mrc_detail(const NeuralModel& victim, const data::Dataset& pool, const MrcConfig& cfg) {
  cfg.validate();
  MrcDetail d;
  d.selected = select_samples(victim, pool, cfg.L, cfg.eta);
  const data::Dataset chosen = pool.subset(d.selected);
  const ntk::NtkMatrix raw = ntk::assemble(victim, chosen.features, cfg.eval_point);
  d.raw_trace = raw.raw_trace;
  const linalg::SymEigen eig = linalg::sym_eigen(raw.theta);
  d.raw_min_eigenvalue = eig.eigenvalues.back();
  Vector clipped_values = eig.eigenvalues;
  for (double& v : clipped_values) v = std::max(v, cfg.q);
  const DenseMatrix clipped = d.raw_min_eigenvalue >= cfg.q
                                  ? linalg::symmetrized(raw.theta)
                                  : linalg::reconstruct(eig, clipped_values);
  d.delta = extraction::output_change(victim, chosen.features, cfg.output_space);
  const Vector x = linalg::solve_spd(clipped, d.delta);
  d.value = linalg::dot(d.delta, x);
  return d;
}

double mrc(const NeuralModel& victim, const data::Dataset& pool, const MrcConfig& cfg) {
  return mrc_detail(victim, pool, cfg).value;
}

double vma(const NeuralModel& victim, const data::Dataset& test_set) {
  return nn::accuracy(victim, test_set);
}

nlohmann::json to_json(const RiskVector& r) {
  return nlohmann::json{
      {"model_id", r.model_id}, {"dataset_id", r.dataset_id}, {"vma", r.vma}, {"mrc", r.mrc}};
}

RiskVector risk_vector_from_json(const nlohmann::json& j) {
  try {
    return RiskVector{j.at("vma").get<double>(), j.at("mrc").get<double>(),
                      j.value("model_id", std::string{}), j.value("dataset_id", std::string{})};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed risk vector: ") + e.what(), 0);
  }
}

void write_jsonl(const std::vector<RiskVector>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
}

std::vector<RiskVector> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<RiskVector> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(risk_vector_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
  }
  return rows;
}

}  // namespace merkit::risk
