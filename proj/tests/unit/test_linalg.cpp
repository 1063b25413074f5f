#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "merkit/error.hpp"
#include "merkit/linalg/decompositions.hpp"

using namespace merkit;
using namespace merkit::linalg;
using merkit::test::random_matrix;
using merkit::test::random_spd;

TEST(DenseMatrix, MatmulMatchesHandComputed) {
  const auto a = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const auto b = DenseMatrix::from_rows({{7, 8, 9}, {10, 11, 12}});
  const auto c = matmul(a, b);
  EXPECT_EQ(c, DenseMatrix::from_rows({{27, 30, 33}, {61, 68, 75}, {95, 106, 117}}));
  EXPECT_THROW(matmul(a, a), DimensionError);
}

TEST(DenseMatrix, TransposeGramAndMatvec) {
  const auto g = random_matrix(4, 7, 1);
  EXPECT_LT(max_abs_diff(gram(g), matmul(g, transpose(g))), 1e-12);
  const auto x = test::random_vector(7, 2);
  const auto y = matvec(g, x);
  const auto yt = matvec_transposed(transpose(g), x);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], yt[i], 1e-12);
  EXPECT_DOUBLE_EQ(trace(DenseMatrix::identity(5)), 5.0);
}

TEST(DenseMatrix, MoveLeavesSourceEmpty) {
  DenseMatrix a(3, 2, 1.0);
  DenseMatrix b(std::move(a));
  EXPECT_EQ(a.rows(), 0u);
  EXPECT_EQ(a.cols(), 0u);
  EXPECT_EQ(b.rows(), 3u);
}

TEST(SymEigen, ReconstructionAndOrthogonality) {
  for (std::size_t n : {1u, 2u, 7u, 30u}) {
    const auto s = symmetrized(random_matrix(n, n, 10 + n));
    const auto eig = sym_eigen(s);
    EXPECT_LT(max_abs_diff(reconstruct(eig, eig.eigenvalues), s), 1e-8) << n;
    const auto vtv = matmul(transpose(eig.eigenvectors), eig.eigenvectors);
    EXPECT_LT(max_abs_diff(vtv, DenseMatrix::identity(n)), 1e-10) << n;
    EXPECT_TRUE(std::is_sorted(eig.eigenvalues.rbegin(), eig.eigenvalues.rend()));
  }
}

// Eigenvalues of a 5x5 symmetric matrix must be roots of det(A - lambda I).
TEST(SymEigen, EigenvaluesAreCharacteristicRoots) {
  const auto a = DenseMatrix::from_rows({{4, 1, -2, 2, 0},
                                         {1, 2, 0, 1, 3},
                                         {-2, 0, 3, -2, 1},
                                         {2, 1, -2, -1, 0},
                                         {0, 3, 1, 0, 5}});
  const auto eig = sym_eigen(a);
  double sum = 0.0;
  for (double l : eig.eigenvalues) {
    DenseMatrix shifted = a;
    for (std::size_t i = 0; i < 5; ++i) shifted(i, i) -= l;
    EXPECT_NEAR(test::determinant(shifted), 0.0, 1e-8) << l;
    // Nearby non-roots are clearly nonzero, so the check has teeth.
    for (std::size_t i = 0; i < 5; ++i) shifted(i, i) -= 1e-3;
    EXPECT_GT(std::abs(test::determinant(shifted)), 1e-7);
    sum += l;
  }
  EXPECT_NEAR(sum, trace(a), 1e-10);
}

TEST(SymEigen, ClipRaisesOnlySmallEigenvalues) {
  const auto s = symmetrized(random_matrix(8, 8, 3));
  const auto clipped = clip_eigenvalues(s, 0.5);
  EXPECT_GE(min_eigenvalue(clipped), 0.5 - 1e-9);
  const auto before = sym_eigen(s).eigenvalues;
  const auto after = sym_eigen(clipped).eigenvalues;
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_NEAR(after[i], std::max(before[i], 0.5), 1e-9);
  }
  const auto spd = random_spd(6, 4, 2.0);
  EXPECT_LT(max_abs_diff(clip_eigenvalues(spd, 0.5), spd), 1e-12);
}

TEST(Cholesky, SolvesSpdSystems) {
  const auto a = random_spd(12, 5);
  const auto b = test::random_vector(12, 6);
  const auto x = solve_spd(a, b);
  const auto r = matvec(a, x);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(r[i], b[i], 1e-10);
}

TEST(Cholesky, RejectsIndefiniteWithEigenvalue) {
  const auto a = DenseMatrix::from_rows({{1, 2}, {2, 1}});
  try {
    Cholesky c(a);
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_NEAR(e.min_eigenvalue(), -1.0, 1e-10);
  }
  EXPECT_THROW(Cholesky(DenseMatrix(2, 3)), DimensionError);
}

TEST(SymEigen, TrivialSpectra) {
  const auto id = sym_eigen(DenseMatrix::identity(3));
  for (double l : id.eigenvalues) EXPECT_NEAR(l, 1.0, 1e-15);
  const double d[] = {3.0, 1.0};
  const auto e = sym_eigen(DenseMatrix::diagonal(d));
  EXPECT_DOUBLE_EQ(e.eigenvalues[0], 3.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[1], 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.eigenvectors(0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.eigenvectors(1, 1)), 1.0);
}

TEST(SymEigen, RelativeFrobeniusReconstruction) {
  const auto s = symmetrized(random_matrix(25, 25, 77));
  const auto e = sym_eigen(s);
  const auto diff = reconstruct(e, e.eigenvalues);
  DenseMatrix r = diff;
  for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] -= s.data()[i];
  EXPECT_LT(frobenius_norm(r) / frobenius_norm(s), 1e-8);
}

TEST(Cholesky, TrivialSystems) {
  const std::vector<double> b{2, 5};
  EXPECT_EQ(solve_spd(DenseMatrix::identity(2), b), b);
  const double d[] = {2.0, 4.0};
  const auto x = solve_spd(DenseMatrix::diagonal(d), std::vector<double>{2, 4});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
  const auto a = random_spd(6, 8);
  const auto rhs = test::random_vector(6, 9);
  const auto r = matvec(a, solve_spd(a, rhs));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(std::abs(r[i] - rhs[i]), 1e-8);
}

TEST(DenseMatrix, AlgebraIdentities) {
  const double d[] = {1, 2, 3};
  EXPECT_DOUBLE_EQ(trace(DenseMatrix::diagonal(d)), 6.0);
  const auto a = random_matrix(4, 4, 1);
  EXPECT_EQ(matmul(a, DenseMatrix::identity(4)), a);
  const auto p = random_matrix(3, 4, 2), q = random_matrix(4, 2, 3);
  EXPECT_LT(max_abs_diff(transpose(matmul(p, q)), matmul(transpose(q), transpose(p))), 1e-14);
}

TEST(DenseMatrix, RejectsNonFiniteAndBadLength) {
  EXPECT_THROW(DenseMatrix(1, 2, std::vector<double>{1.0, std::nan("")}), DataError);
  EXPECT_THROW(DenseMatrix(1, 2, std::vector<double>{1.0, INFINITY}), DataError);
  EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1.0}), DimensionError);
  const DenseMatrix m(3, 5);
  EXPECT_EQ(m.data().size(), 15u);
}

TEST(Clip, DiagonalNoOpAndIndefiniteCases) {
  const double d[] = {2.0, 0.1};
  const auto c = clip_eigenvalues(DenseMatrix::diagonal(d), 0.5);
  EXPECT_NEAR(c(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(c(1, 1), 0.5, 1e-12);
  EXPECT_NEAR(c(0, 1), 0.0, 1e-12);

  // SPD with smallest eigenvalue exactly 1.2.
  const auto q = sym_eigen(symmetrized(random_matrix(4, 4, 4))).eigenvectors;
  const std::vector<double> spec{5.0, 3.0, 2.0, 1.2};
  const auto pd = reconstruct({spec, q}, spec);
  EXPECT_LT(max_abs_diff(clip_eigenvalues(pd, 0.5), pd), 1e-9);

  const auto ind = symmetrized(random_matrix(4, 4, 12));
  const auto before = sym_eigen(ind).eigenvalues;
  ASSERT_LT(before.back(), 0.0);
  const auto after = sym_eigen(clip_eigenvalues(ind, 0.5)).eigenvalues;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(after[i], std::max(before[i], 0.5), 1e-9);
}
