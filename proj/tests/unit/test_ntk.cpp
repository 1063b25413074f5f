#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "merkit/error.hpp"
#include "merkit/linalg/decompositions.hpp"
#include "merkit/ntk/ntk.hpp"

using namespace merkit;
using namespace merkit::ntk;
using linalg::DenseMatrix;

namespace {

nn::ModelSpec mlp(std::size_t d, std::size_t k, std::vector<std::size_t> widths, bool bias = true) {
  nn::ModelSpec s;
  s.input_dim = d;
  s.num_classes = k;
  s.layer_widths = std::move(widths);
  s.activation = nn::Activation::kTanh;
  s.init_seed = 3;
  s.bias = bias;
  return s;
}

}  // namespace

// f(x) = W x: every class shares the input Jacobian, so k(x, x') = (x . x') I_K.
TEST(Ntk, LinearModelKernelIsScaledIdentity) {
  const nn::NeuralModel m(mlp(4, 3, {}, false));
  const auto xs = test::random_matrix(5, 4, 1);
  const auto ntk = assemble(m, xs, nn::At::kInit);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double ip = linalg::dot(xs.row(i), xs.row(j));
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
          EXPECT_EQ(ntk.theta(i * 3 + a, j * 3 + b), a == b ? ip : 0.0);
        }
      }
    }
  }
  const auto block = kernel_block(m, xs.row(0), xs.row(1), nn::At::kInit);
  EXPECT_EQ(block(0, 0), linalg::dot(xs.row(0), xs.row(1)));
}

TEST(Ntk, ThetaMatchesStackedJacobianOracle) {
  const nn::NeuralModel m(mlp(3, 2, {8, 6}));
  const auto xs = test::random_matrix(7, 3, 2);
  // Oracle: stack per-sample Jacobians by hand and multiply.
  DenseMatrix g(14, m.param_count());
  for (std::size_t i = 0; i < 7; ++i) {
    const auto j = nn::param_jacobian(m, xs.row(i), nn::At::kCurrent);
    for (std::size_t a = 0; a < 2; ++a) {
      std::copy(j.row(a).begin(), j.row(a).end(), g.row(i * 2 + a).begin());
    }
  }
  EXPECT_EQ(stacked_jacobian(m, xs, nn::At::kCurrent), g);
  const auto oracle = linalg::matmul(g, linalg::transpose(g));
  const auto ntk = assemble(m, xs, nn::At::kCurrent);
  EXPECT_LT(linalg::max_abs_diff(ntk.theta, oracle), 1e-10);
  EXPECT_NEAR(trace(ntk), linalg::trace(oracle), 1e-10);
  EXPECT_EQ(ntk.n, 7u);
  EXPECT_EQ(ntk.k, 2u);
  EXPECT_EQ(ntk.sample_ids.size(), 7u);
  const auto blk = kernel_block(m, xs.row(2), xs.row(5), nn::At::kCurrent);
  EXPECT_NEAR(blk(1, 0), oracle(2 * 2 + 1, 5 * 2 + 0), 1e-12);
}

TEST(Ntk, ClippingFloorsSpectrumKeepsRawTrace) {
  const nn::NeuralModel m(mlp(2, 3, {3}));
  // More outputs (20 * 3) than parameters makes the raw kernel singular.
  const auto xs = test::random_matrix(20, 2, 4);
  ASSERT_LT(m.param_count(), 60u);
  const auto raw = assemble(m, xs, nn::At::kInit);
  EXPECT_LT(linalg::min_eigenvalue(raw.theta), 1e-8);
  for (double q : {0.01, 0.5, 2.0}) {
    const auto c = assemble(m, xs, nn::At::kInit, q);
    EXPECT_GE(linalg::min_eigenvalue(c.theta), q - 1e-9);
    EXPECT_DOUBLE_EQ(c.raw_trace, raw.raw_trace);
    EXPECT_EQ(c.clip_q, q);
  }
}

TEST(Ntk, KappaIsLargestDiagonalBlockEigenvalue) {
  const nn::NeuralModel m(mlp(2, 2, {5}));
  const auto xs = test::random_matrix(4, 2, 5);
  double best = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto b = kernel_block(m, xs.row(i), xs.row(i), nn::At::kInit);
    best = std::max(best, linalg::sym_eigen(b).eigenvalues.front());
  }
  EXPECT_NEAR(kappa(m, xs, nn::At::kInit), best, 1e-12);
}

TEST(Ntk, DumpLoadRoundTrip) {
  const nn::NeuralModel m(mlp(2, 2, {4}));
  const auto ntk = assemble(m, test::random_matrix(3, 2, 6), nn::At::kInit);
  const auto path = (std::filesystem::temp_directory_path() / "merkit_theta.bin").string();
  dump_theta(ntk, path);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 36u * 8u);
  const auto back = load_theta(path);
  EXPECT_EQ(back.theta, ntk.theta);
  EXPECT_EQ(back.n, 3u);
  EXPECT_EQ(back.k, 2u);
  std::ofstream(path) << "garbage";
  EXPECT_THROW(load_theta(path), ParseError);
}

TEST(Ntk, EvalPointNames) {
  EXPECT_EQ(eval_point_from_string("init"), nn::At::kInit);
  EXPECT_EQ(eval_point_from_string("trained"), nn::At::kCurrent);
  EXPECT_STREQ(eval_point_name(nn::At::kInit), "init");
  EXPECT_THROW(eval_point_from_string("final"), ParameterError);
}

TEST(Ntk, BlockSymmetryAndDiagonalPsd) {
  const nn::NeuralModel m(mlp(3, 3, {6}));
  const auto x = test::random_vector(3, 1), y = test::random_vector(3, 2);
  const auto kxy = kernel_block(m, x, y, nn::At::kInit);
  const auto kyx = kernel_block(m, y, x, nn::At::kInit);
  EXPECT_LT(linalg::max_abs_diff(kxy, linalg::transpose(kyx)), 1e-12);
  const auto kxx = kernel_block(m, x, x, nn::At::kInit);
  for (double l : linalg::sym_eigen(kxx).eigenvalues) EXPECT_GE(l, -1e-12);
}

TEST(Ntk, BlockMatchesJacobianProduct) {
  const nn::NeuralModel m(mlp(2, 3, {6}));
  const auto x = test::random_vector(2, 5), y = test::random_vector(2, 6);
  const auto jx = nn::param_jacobian(m, x, nn::At::kInit);
  const auto jy = nn::param_jacobian(m, y, nn::At::kInit);
  EXPECT_LT(linalg::max_abs_diff(kernel_block(m, x, y, nn::At::kInit),
                                 linalg::matmul(jx, linalg::transpose(jy))),
            1e-12);
}

TEST(Ntk, SingleSampleKernelIsItsBlock) {
  const nn::NeuralModel m(mlp(2, 3, {5}));
  DenseMatrix xs(1, 2, std::vector<double>{0.4, -0.7});
  const auto ntk = assemble(m, xs, nn::At::kInit);
  EXPECT_LT(linalg::max_abs_diff(ntk.theta, kernel_block(m, xs.row(0), xs.row(0), nn::At::kInit)),
            1e-14);
}

TEST(Ntk, OrthonormalInputsOnLinearModel) {
  const nn::NeuralModel m(mlp(2, 2, {}, false));
  const DenseMatrix xs(2, 2, std::vector<double>{1, 0, 0, 1});
  const auto ntk = assemble(m, xs, nn::At::kInit);
  EXPECT_DOUBLE_EQ(trace(ntk), 4.0);
  EXPECT_DOUBLE_EQ(kappa(m, xs, nn::At::kInit), 1.0);
}

TEST(Ntk, TraceEqualsSumOfDiagonal) {
  const nn::NeuralModel m(mlp(3, 2, {4, 4}));
  const auto xs = test::random_matrix(6, 3, 9);
  const auto ntk = assemble(m, xs, nn::At::kInit, 0.5);
  double raw = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto k = kernel_block(m, xs.row(i), xs.row(i), nn::At::kInit);
    raw += k(0, 0) + k(1, 1);
  }
  EXPECT_NEAR(trace(ntk), raw, 1e-10);
}
