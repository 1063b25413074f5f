#include "merkit/inspector/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "merkit/error.hpp"

namespace merkit::inspector {

std::vector<MeasuredModel> from_fixtures(const std::vector<data::FixtureRow>& rows) {
  std::vector<MeasuredModel> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    MeasuredModel m;
    m.risk = RiskVector{r.vma / 100.0, data::primary_mrc(r), r.model, r.dataset};
    m.fidelity = r.fidelity;
    m.group = data::to_string(r.group);
    out.push_back(std::move(m));
  }
  return out;
}

const char* to_string(Scope s) noexcept {
  switch (s) {
    case Scope::kAll: return "all";
    case Scope::kIntra: return "intra";
    case Scope::kInter: return "inter";
  }
  return "?";
}

Scope scope_from_string(const std::string& s) {
  for (Scope v : {Scope::kAll, Scope::kIntra, Scope::kInter}) {
    if (s == to_string(v)) return v;
  }
  throw ParameterError("unknown scope '" + s + "' (expected all, intra or inter)");
}

const char* to_string(FeatureSet f) noexcept {
  switch (f) {
    case FeatureSet::kVma: return "vma";
    case FeatureSet::kMrc: return "mrc";
    case FeatureSet::kBoth: return "vma+mrc";
  }
  return "?";
}

FeatureSet feature_set_from_string(const std::string& s) {
  for (FeatureSet v : {FeatureSet::kVma, FeatureSet::kMrc, FeatureSet::kBoth}) {
    if (s == to_string(v)) return v;
  }
  if (s == "both") return FeatureSet::kBoth;
  throw ParameterError("unknown feature set '" + s + "' (expected vma, mrc or vma+mrc)");
}

Vector side_features(const RiskVector& r, FeatureSet set) {
  switch (set) {
    case FeatureSet::kVma: return {r.vma};
    case FeatureSet::kMrc: return {r.mrc};
    case FeatureSet::kBoth: return {r.vma, r.mrc};
  }
  return {};
}

Vector pair_features(const RiskVector& a, const RiskVector& b, FeatureSet set, bool augment) {
  const Vector fa = side_features(a, set);
  const Vector fb = side_features(b, set);
  Vector out(fa);
  out.insert(out.end(), fb.begin(), fb.end());
  if (augment) {
    for (std::size_t i = 0; i < fa.size(); ++i) out.push_back(fa[i] - fb[i]);
  }
  return out;
}

std::vector<PairExample> build_pairs(const std::vector<MeasuredModel>& models, Scope scope,
                                     FeatureSet set, bool augment) {
  std::map<std::string, std::vector<std::size_t>> by_dataset;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& id = models[i].risk.dataset_id;
    if (!by_dataset.contains(id)) order.push_back(id);
    by_dataset[id].push_back(i);
  }
  if (order.empty()) throw DataError("no models to pair");
  std::vector<PairExample> out;
  for (const auto& ds : order) {
    const auto& members = by_dataset[ds];
    if (members.size() < 2) {
      throw DataError("dataset '" + ds + "' has fewer than two models to pair");
    }
    for (std::size_t ia : members) {
      for (std::size_t ib : members) {
        if (ia == ib) continue;
        const auto& a = models[ia];
        const auto& b = models[ib];
        const bool intra = a.group == b.group;
        if ((scope == Scope::kIntra && !intra) || (scope == Scope::kInter && intra)) continue;
        PairExample p;
        p.a = ia;
        p.b = ib;
        p.r_a = a.risk;
        p.r_b = b.risk;
        p.features = pair_features(a.risk, b.risk, set, augment);
        p.label = a.fidelity - b.fidelity > 0.0 ? 0 : 1;
        p.intra_group = intra;
        p.dataset = ds;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

void refeaturize(std::vector<PairExample>& pairs, FeatureSet set, bool augment) {
  for (auto& p : pairs) p.features = pair_features(p.r_a, p.r_b, set, augment);
}

PairDatasetSplit split_pairs(std::vector<PairExample> all, std::uint64_t seed,
                             double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test_fraction must lie in (0, 1)");
  }
  if (all.size() < 2) throw DataError("need at least two pair examples to split");
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(all.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, all.size() - 1);
  PairDatasetSplit s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_test ? s.test : s.train).push_back(all[idx[i]]);
  }
  s.all = std::move(all);
  return s;
}

}  // namespace merkit::inspector
