#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "merkit/data/fixtures.hpp"
#include "merkit/error.hpp"
#include "merkit/inspector/reports.hpp"
#include "merkit/inspector/stats.hpp"

using namespace merkit;
using namespace merkit::inspector;

namespace {

const std::vector<MeasuredModel>& fixture_models() {
  static const auto models = from_fixtures(data::load_fixtures(MERKIT_FIXTURES_DIR));
  return models;
}

double pcc_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST(Stats, PccMatchesCovarianceFormula) {
  const std::vector<double> x{1.0, 2.5, 3.0, 4.5, 7.0}, y{2.0, 2.0, 5.0, 4.0, 9.5};
  EXPECT_NEAR(pcc(x, y), pcc_oracle(x, y), 1e-12);
  std::vector<double> neg(y.rbegin(), y.rend());
  EXPECT_NEAR(pcc(x, neg), pcc_oracle(x, neg), 1e-12);
  EXPECT_DOUBLE_EQ(pcc(x, x), 1.0);
  EXPECT_THROW(pcc(x, std::vector<double>(5, 1.0)), DataError);
  EXPECT_THROW(pcc(x, std::vector<double>{1.0}), DimensionError);
}

TEST(Stats, KendallTauA) {
  EXPECT_NEAR(krc(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 4.0 / 6.0,
              1e-15);
  // Tied pairs count as neither concordant nor discordant, over all n(n-1)/2 pairs.
  EXPECT_NEAR(krc(std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 3}), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(krc(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
  const std::vector<double> v{1.0, 2.0, 4.0};
  EXPECT_NEAR(mean(v), 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(stddev(v), std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                    (4 - 7.0 / 3) * (4 - 7.0 / 3)) /
                                   2.0),
              1e-15);
}

TEST(Pairs, FixtureCounts) {
  const auto& m = fixture_models();
  ASSERT_EQ(m.size(), 80u);
  EXPECT_EQ(build_pairs(m, Scope::kAll).size(), 1200u);
  EXPECT_EQ(build_pairs(m, Scope::kIntra).size(), 270u);
  EXPECT_EQ(build_pairs(m, Scope::kInter).size(), 930u);
}

TEST(Pairs, SwapAntisymmetryAndBalance) {
  const auto pairs = build_pairs(fixture_models(), Scope::kAll);
  std::map<std::pair<std::string, std::string>, const PairExample*> by_ids;
  std::size_t zeros = 0;
  for (const auto& p : pairs) {
    by_ids[{p.dataset + "/" + p.r_a.model_id, p.r_b.model_id}] = &p;
    zeros += p.label == 0;
    EXPECT_EQ(p.r_a.dataset_id, p.r_b.dataset_id);
    ASSERT_EQ(p.features.size(), 6u);
    EXPECT_DOUBLE_EQ(p.features[0], p.r_a.vma);
    EXPECT_DOUBLE_EQ(p.features[3], p.r_b.mrc);
    EXPECT_DOUBLE_EQ(p.features[4], p.r_a.vma - p.r_b.vma);
  }
  EXPECT_EQ(zeros * 2, pairs.size());
  for (const auto& p : pairs) {
    const auto* q = by_ids.at({p.dataset + "/" + p.r_b.model_id, p.r_a.model_id});
    EXPECT_EQ(p.label + q->label, 1);
    EXPECT_EQ(p.intra_group, q->intra_group);
    EXPECT_DOUBLE_EQ(p.features[4], -q->features[4]);
    EXPECT_DOUBLE_EQ(p.features[5], -q->features[5]);
  }
}

TEST(Pairs, FeatureSetsAndAugmentation) {
  const risk::RiskVector a{0.9, 2.0, "a", "d"}, b{0.8, 3.0, "b", "d"};
  EXPECT_EQ(pair_features(a, b, FeatureSet::kVma, false), (linalg::Vector{0.9, 0.8}));
  EXPECT_EQ(pair_features(a, b, FeatureSet::kMrc, true), (linalg::Vector{2.0, 3.0, -1.0}));
  EXPECT_EQ(pair_features(a, b, FeatureSet::kBoth, false).size(), 4u);
  EXPECT_EQ(feature_set_from_string("both"), FeatureSet::kBoth);
  EXPECT_EQ(scope_from_string("intra"), Scope::kIntra);
  EXPECT_THROW(scope_from_string("cross"), ParameterError);
  auto pairs = build_pairs(fixture_models(), Scope::kIntra);
  refeaturize(pairs, FeatureSet::kMrc, false);
  EXPECT_EQ(pairs.front().features.size(), 2u);
}

TEST(Pairs, SplitIsSeededPartition) {
  const auto pairs = build_pairs(fixture_models(), Scope::kIntra);
  const auto s = split_pairs(pairs, 3);
  EXPECT_EQ(s.test.size(), 54u);
  EXPECT_EQ(s.train.size(), 216u);
  std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
  for (const auto* part : {&s.train, &s.test}) {
    for (const auto& p : *part) EXPECT_TRUE(seen.insert({p.dataset, p.a, p.b}).second);
  }
  EXPECT_EQ(seen.size(), 270u);
  const auto again = split_pairs(pairs, 3);
  EXPECT_EQ(again.test.front().a, s.test.front().a);
  EXPECT_EQ(again.test.front().b, s.test.front().b);
}

TEST(Pairs, SingleModelDatasetRejected) {
  std::vector<MeasuredModel> m(1);
  m[0].risk = {0.5, 1.0, "only", "d"};
  EXPECT_THROW(build_pairs(m, Scope::kAll), DataError);
}

TEST(Comparator, LearnsSeparableRule) {
  // label 0 iff the first feature exceeds the second.
  std::vector<PairExample> train, test;
  for (int i = 0; i < 80; ++i) {
    PairExample p;
    const double u = (i % 17) / 17.0, v = (i * 7 % 13) / 13.0;
    p.features = {u, v, u - v};
    p.label = u - v > 0 ? 0 : 1;
    (i < 60 ? train : test).push_back(p);
  }
  ComparatorConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 1e-2;
  const auto c = train_comparator(train, cfg);
  EXPECT_GE(cacc(c, test), 0.9);
  EXPECT_EQ(c.mean().size(), 3u);
  const double pr = c.probability(test[0].features);
  EXPECT_GE(pr, 0.0);
  EXPECT_LE(pr, 1.0);
  EXPECT_EQ(c.predict(test[0].features), pr > 0.5 ? 1 : 0);
  std::vector<PairExample> one_class(train.begin(), train.begin() + 1);
  EXPECT_THROW(train_comparator(one_class, cfg), DataError);
  EXPECT_THROW(train_comparator({}, cfg), DataError);
}

TEST(Comparator, ArchitectureAndDeterminism) {
  auto pairs = build_pairs(fixture_models(), Scope::kIntra);
  const auto s = split_pairs(pairs, 1);
  ComparatorConfig cfg;
  cfg.epochs = 5;
  const auto a = train_comparator(s.train, cfg);
  const auto b = train_comparator(s.train, cfg);
  EXPECT_EQ(a.model().spec().layer_widths, (std::vector<std::size_t>{64, 64, 32}));
  EXPECT_EQ(a.model().num_classes(), 2u);
  EXPECT_EQ(cacc(a, s.test), cacc(b, s.test));
}

TEST(Reports, MetricRowsForFixtures) {
  const auto r = metric_report(fixture_models());
  // 5 datasets x (4 groups + overall) + pooled.
  EXPECT_EQ(r.rows.size(), 26u);
  bool saw_levit = false;
  for (const auto& row : r.rows) {
    if (row.dataset == "cifar10" && row.group == "LeViT") {
      saw_levit = true;
      EXPECT_EQ(row.n, 4u);
      EXPECT_DOUBLE_EQ(row.krc_mrc, -1.0);
      EXPECT_LT(row.pcc_mrc, -0.9);
    }
  }
  EXPECT_TRUE(saw_levit);
  EXPECT_EQ(r.rows.back().dataset, "pooled");
}

TEST(Reports, Table1LayoutWithShortTraining) {
  ComparatorConfig cfg;
  cfg.epochs = 2;
  const auto cells = reproduce_table1(fixture_models(), {0, 1}, cfg);
  EXPECT_EQ(cells.size(), 12u);
  const auto& c = find_cell(cells, Scope::kAll, false, FeatureSet::kBoth);
  EXPECT_EQ(c.per_seed.size(), 2u);
  EXPECT_NEAR(c.mean, (c.per_seed[0] + c.per_seed[1]) / 2, 1e-15);
  EXPECT_THROW(find_cell(cells, Scope::kIntra, false, FeatureSet::kVma), ParameterError);
  const auto j = table1_json(cells);
  EXPECT_EQ(j.size(), 12u);
}

namespace {

MeasuredModel measured(const std::string& id, double vma, double mrc, double fid,
                       const std::string& group = "g") {
  MeasuredModel m;
  m.risk = {vma, mrc, id, "d"};
  m.fidelity = fid;
  m.group = group;
  return m;
}

// Linear two-logit net on (u, v, u - v) that favours label 1 when u < v.
Comparator difference_rule(double weight) {
  nn::ModelSpec s;
  s.input_dim = 3;
  s.num_classes = 2;
  s.bias = false;
  nn::NeuralModel m(s);
  m.set_params(linalg::Vector{0, 0, weight, 0, 0, -weight});
  return Comparator(std::move(m), Vector(3, 0.0), Vector(3, 1.0));
}

}  // namespace

TEST(Pairs, SixteenModelsAndLabelRule) {
  std::vector<MeasuredModel> ms;
  for (int i = 0; i < 16; ++i) ms.push_back(measured("m" + std::to_string(i), 0.5, i, 0.01 * i));
  EXPECT_EQ(build_pairs(ms, Scope::kAll).size(), 240u);

  const auto two = build_pairs({measured("a", 0.9, 1.0, 0.9), measured("b", 0.8, 2.0, 0.8)},
                               Scope::kAll);
  ASSERT_EQ(two.size(), 2u);
  for (const auto& p : two) EXPECT_EQ(p.label, p.r_a.model_id == "a" ? 0 : 1);
}

TEST(Comparator, FitsSeparableTrainingSet) {
  std::vector<PairExample> train;
  for (int i = 0; i < 100; ++i) {
    PairExample p;
    const double u = (i % 10) / 10.0, v = ((i * 3) % 10) / 10.0 + 0.05;
    p.features = {u, v, u - v};
    p.label = u - v > 0 ? 0 : 1;
    train.push_back(p);
  }
  ComparatorConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 1e-2;
  EXPECT_GE(cacc(train_comparator(train, cfg), train), 0.99);
}

TEST(Comparator, FlippedLabelsFlipPredictions) {
  const auto s = split_pairs(build_pairs(fixture_models(), Scope::kIntra), 2);
  ComparatorConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = 1e-3;
  auto flipped = s.train;
  for (auto& p : flipped) p.label = 1 - p.label;
  const auto a = train_comparator(s.train, cfg);
  const auto b = train_comparator(flipped, cfg);
  std::size_t opposite = 0;
  for (const auto& p : s.test) opposite += a.predict(p.features) != b.predict(p.features);
  EXPECT_GE(static_cast<double>(opposite) / static_cast<double>(s.test.size()), 0.9);
}

TEST(Comparator, UntrainedIsNearChance) {
  const auto s = split_pairs(build_pairs(fixture_models(), Scope::kAll), 3);
  ComparatorConfig cfg;
  cfg.epochs = 0;
  EXPECT_NEAR(cacc(train_comparator(s.train, cfg), s.test), 0.5, 0.1);
}

TEST(Cacc, PerfectAndConstantPredictors) {
  std::vector<PairExample> pairs;
  for (int i = 0; i < 40; ++i) {
    PairExample p;
    const double u = (i % 7) / 7.0, v = (i % 5) / 5.0 + 0.01;
    p.features = {u, v, u - v};
    p.label = u - v > 0 ? 0 : 1;
    pairs.push_back(p);
    p.features = {v, u, v - u};
    p.label = 1 - p.label;
    pairs.push_back(p);
  }
  EXPECT_DOUBLE_EQ(cacc(difference_rule(5.0), pairs), 1.0);
  EXPECT_DOUBLE_EQ(cacc(difference_rule(0.0), pairs), 0.5);
}

TEST(Stats, LinearAndReversedSeries) {
  const std::vector<double> x{0.5, 1.0, 2.0, 3.5, 4.0};
  std::vector<double> up, down;
  for (double v : x) {
    up.push_back(2 * v + 3);
    down.push_back(-v);
  }
  EXPECT_NEAR(pcc(x, up), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(krc(x, up), 1.0);
  EXPECT_NEAR(pcc(x, down), -1.0, 1e-12);
  EXPECT_DOUBLE_EQ(krc(x, down), -1.0);
}
