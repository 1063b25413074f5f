#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "merkit/error.hpp"
#include "merkit/extraction/attack.hpp"
#include "merkit/extraction/kernel_extract.hpp"
#include "merkit/linalg/decompositions.hpp"
#include "merkit/ntk/ntk.hpp"

using namespace merkit;
using namespace merkit::extraction;

namespace {

nn::ModelSpec small_spec(std::size_t d, std::size_t k, std::vector<std::size_t> widths) {
  nn::ModelSpec s;
  s.input_dim = d;
  s.num_classes = k;
  s.layer_widths = std::move(widths);
  s.activation = nn::Activation::kTanh;
  s.init_seed = 21;
  return s;
}

nn::NeuralModel trained_victim(const data::Dataset& d, std::vector<std::size_t> widths,
                               std::size_t epochs = 60) {
  nn::NeuralModel m(small_spec(d.dim(), d.num_classes, std::move(widths)));
  nn::TrainConfig cfg;
  cfg.optimizer = nn::Optimizer::kAdam;
  cfg.learning_rate = 0.01;
  cfg.epochs = epochs;
  cfg.seed = 2;
  nn::train(m, d, cfg);
  return m;
}

nn::TrainConfig surrogate_cfg(std::uint64_t seed) {
  nn::TrainConfig c;
  c.optimizer = nn::Optimizer::kAdam;
  c.learning_rate = 0.01;
  c.epochs = 40;
  c.batch_size = 16;
  c.seed = seed;
  return c;
}

}  // namespace

// The gap between the ridge norm and the exact quadratic form is about
// 2 N lambda |Theta^-1 df|^2, so the check needs a well-conditioned kernel:
// 16-dimensional inputs keep the smallest eigenvalue well above zero.
TEST(KernelExtract, InterpolatesAndMatchesRkhsIdentity) {
  const auto d = data::make_blobs(16, 16, 2, 1.0, 3);
  const auto victim = trained_victim(d, {64});
  ASSERT_GT(victim.param_count(), 32u);
  const auto sol = kernel_extract(victim, d.features, 1e-8);
  for (std::size_t i = 0; i < sol.target.size(); ++i) {
    EXPECT_NEAR(sol.fitted[i], sol.target[i], 1e-3);
  }
  const auto ntk = ntk::assemble(victim, d.features, nn::At::kInit);
  const auto inv = linalg::solve_spd(ntk.theta, sol.target);
  EXPECT_NEAR(sol.rkhs_norm_sq, linalg::dot(sol.target, inv), 1e-6);
  EXPECT_EQ(sol.target, output_change(victim, d.features, nn::OutputSpace::kLogits));
}

TEST(KernelExtract, LinearizedSurrogateAgreesOnQueries) {
  const auto d = data::make_blobs(20, 2, 3, 0.5, 5);
  const auto victim = trained_victim(d, {32});
  const auto sol = kernel_extract(victim, d.features, 1e-8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto fv = nn::forward(victim, d.x(i));
    if (nn::top_two_gap(fv) <= 2e-3) continue;
    const auto fs = kernel_predict(sol, victim, d.x(i));
    EXPECT_EQ(nn::argmax(fs), nn::argmax(fv)) << i;
  }
}

TEST(KernelExtract, SingularKernelNeedsRidge) {
  const auto d = data::make_blobs(30, 2, 2, 0.5, 6);
  const auto victim = trained_victim(d, {2}, 10);
  ASSERT_LT(victim.param_count(), 60u);
  EXPECT_THROW(kernel_extract(victim, d.features, 0.0), SingularityError);
  EXPECT_NO_THROW(kernel_extract(victim, d.features, 1e-3));
  EXPECT_THROW(kernel_extract(victim, d.features, -1.0), ParameterError);
}

TEST(Projection, IsSymmetricIdempotent) {
  const auto d = data::make_blobs(10, 2, 2, 0.5, 7);
  const auto victim = trained_victim(d, {16});
  const auto p = projection_matrix(victim, d.features);
  EXPECT_LT(linalg::max_abs_diff(p, linalg::transpose(p)), 1e-8);
  EXPECT_LT(linalg::max_abs_diff(linalg::matmul(p, p), p), 1e-8);
  const auto pd = project_weight_change(victim, d.features);
  const auto ref = linalg::matvec(p, victim.weight_change());
  for (std::size_t i = 0; i < pd.size(); ++i) EXPECT_NEAR(pd[i], ref[i], 1e-9);
}

TEST(Projection, CapacityLimit) {
  const auto m = nn::NeuralModel(small_spec(2, 2, {60, 60}));
  ASSERT_GT(m.param_count(), kMaxProjectionParams);
  EXPECT_THROW(projection_matrix(m, test::random_matrix(3, 2, 1)), CapacityError);
}

TEST(Attack, SelfAttackHasFullFidelity) {
  const auto d = data::make_blobs(60, 2, 3, 0.5, 8);
  const auto victim = trained_victim(d, {16});
  EXPECT_DOUBLE_EQ(fidelity(victim, victim, d), 1.0);
  AttackConfig cfg;
  cfg.start_from_victim = true;
  cfg.surrogate_train = surrogate_cfg(1);
  cfg.surrogate_train.learning_rate = 0.0;
  const auto r = run_attack(victim, d, cfg, d);
  EXPECT_DOUBLE_EQ(r.fidelity, 1.0);
  EXPECT_EQ(r.queries_used, d.size());
}

TEST(Attack, BudgetsAndQueryAccounting) {
  const auto d = data::make_blobs(80, 2, 2, 0.6, 9);
  const auto victim = trained_victim(d, {8});
  for (auto s : {Strategy::kRandom, Strategy::kUncertainty, Strategy::kKCenter, Strategy::kJbda}) {
    AttackConfig cfg;
    cfg.strategy = s;
    cfg.budget = 24;
    cfg.rounds = 2;
    cfg.surrogate_train = surrogate_cfg(3);
    const auto r = run_attack(victim, d, cfg, d);
    EXPECT_EQ(r.queries_used, 24u) << to_string(s);
    ASSERT_FALSE(r.per_round.empty());
    EXPECT_EQ(r.per_round.back().queries, 24u) << to_string(s);
    EXPECT_GE(r.fidelity, 0.0);
    EXPECT_LE(r.fidelity, 1.0);
    const auto again = run_attack(victim, d, cfg, d);
    EXPECT_EQ(again.fidelity, r.fidelity) << to_string(s);
  }
  AttackConfig over;
  over.strategy = Strategy::kRandom;
  over.budget = 81;
  over.surrogate_train = surrogate_cfg(0);
  EXPECT_THROW(run_attack(victim, d, over, d), ParameterError);
}

TEST(Attack, JbdaStepsAgainstLossGradient) {
  const nn::NeuralModel m(small_spec(3, 3, {5}));
  const linalg::Vector x{0.2, -0.4, 0.9};
  const double step = 0.25;
  const auto crafted = jbda_craft(m, x, 1, step);
  const linalg::Vector onehot{0.0, 1.0, 0.0};
  const auto g = nn::input_gradient(m, x, onehot, nn::Loss::kCrossEntropy);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(crafted[i], x[i] - step * g[i], 1e-15);
}

TEST(Attack, StrategyNames) {
  EXPECT_EQ(strategy_from_string("kcenter"), Strategy::kKCenter);
  EXPECT_EQ(oracle_mode_from_string("labels_only"), OracleMode::kLabelsOnly);
  EXPECT_THROW(strategy_from_string("greedy"), ParameterError);
}

TEST(KernelExtract, HeavyRidgeShrinksToInit) {
  const auto d = data::make_blobs(12, 2, 2, 0.5, 4);
  const auto victim = trained_victim(d, {16});
  const auto sol = kernel_extract(victim, d.features, 1e10);
  for (double a : sol.alpha) EXPECT_LT(std::abs(a), 1e-8);
  const auto f0 = nn::forward(victim, d.x(0), nn::At::kInit);
  const auto fs = kernel_predict(sol, victim, d.x(0));
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(fs[k], f0[k], 1e-6);
}

TEST(KernelExtract, PredictionAtQueryMatchesVictim) {
  const auto d = data::make_blobs(16, 16, 2, 1.0, 3);
  const auto victim = trained_victim(d, {64});
  const auto sol = kernel_extract(victim, d.features, 1e-8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto fv = nn::forward(victim, d.x(i));
    const auto fs = kernel_predict(sol, victim, d.x(i));
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(fs[k], fv[k], 1e-3);
  }
}

TEST(KernelExtract, PredictionIsKernelWeightedSum) {
  const auto d = data::make_blobs(5, 3, 2, 0.5, 12);
  const auto victim = trained_victim(d, {8});
  const auto sol = kernel_extract(victim, d.features, 1e-4);
  const auto x = test::random_vector(3, 77);
  auto expect = nn::forward(victim, x, nn::At::kInit);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto kb = ntk::kernel_block(victim, x, d.x(i), nn::At::kInit);
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) expect[a] += kb(a, b) * sol.alpha[i * 2 + b];
    }
  }
  const auto got = kernel_predict(sol, victim, x);
  for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(got[a], expect[a], 1e-9);

  KernelSolution zero = sol;
  std::fill(zero.alpha.begin(), zero.alpha.end(), 0.0);
  std::fill(zero.weight_delta.begin(), zero.weight_delta.end(), 0.0);
  EXPECT_EQ(kernel_predict(zero, victim, x), nn::forward(victim, x, nn::At::kInit));
}

TEST(Projection, FullRowSpaceKeepsWeightChange) {
  auto s = small_spec(3, 2, {});
  s.bias = false;
  nn::NeuralModel m(s);
  linalg::Vector theta(m.params().begin(), m.params().end());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += 0.1 * static_cast<double>(i + 1);
  m.set_params(theta);
  const auto queries = test::random_matrix(3, 3, 5);
  const auto projected = project_weight_change(m, queries);
  const auto dtheta = m.weight_change();
  for (std::size_t i = 0; i < dtheta.size(); ++i) EXPECT_NEAR(projected[i], dtheta[i], 1e-6);
}

TEST(Fidelity, FlippedCopyAndLoopOracle) {
  auto s = small_spec(2, 2, {});
  s.bias = false;
  const nn::NeuralModel a(s);
  linalg::Vector neg(a.params().begin(), a.params().end());
  for (double& v : neg) v = -v;
  const nn::NeuralModel b(s, linalg::Vector(a.init_params().begin(), a.init_params().end()), neg);
  const auto d = data::make_blobs(40, 2, 2, 1.0, 3);
  EXPECT_DOUBLE_EQ(fidelity(a, b, d), 0.0);

  const auto c = trained_victim(d, {6}, 5);
  const auto e = trained_victim(d, {6}, 1);
  std::size_t same = 0;
  for (std::size_t i = 0; i < d.size(); ++i) same += nn::predict(c, d.x(i)) == nn::predict(e, d.x(i));
  EXPECT_DOUBLE_EQ(fidelity(c, e, d), same / 40.0);
}

TEST(Attack, FullQueryOnSeparableBlobs) {
  const auto d = data::make_blobs(100, 2, 2, 0.2, 7);
  const auto victim = trained_victim(d, {16});
  AttackConfig cfg;
  cfg.surrogate_train = surrogate_cfg(4);
  const auto r = run_attack(victim, d, cfg, d);
  EXPECT_GE(r.fidelity, 0.95);
}
