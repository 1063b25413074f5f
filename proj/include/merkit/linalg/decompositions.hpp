#pragma once

#include <span>

#include "merkit/linalg/dense_matrix.hpp"

namespace merkit::linalg {

struct SymEigen {
  /// Descending.
  Vector eigenvalues;
  /// Column i is the unit eigenvector for eigenvalues[i].
  DenseMatrix eigenvectors;
};

/// Cyclic Jacobi eigendecomposition of (m + m^T) / 2.
SymEigen sym_eigen(const DenseMatrix& m);

/// V diag(values) V^T for the eigenvectors of `eig`.
DenseMatrix reconstruct(const SymEigen& eig, std::span<const double> values);

/// Raises every eigenvalue below q to q; eigenvectors are kept. Returns the
/// symmetrized input unchanged when no eigenvalue is below q.
DenseMatrix clip_eigenvalues(const DenseMatrix& m, double q);

double min_eigenvalue(const DenseMatrix& m);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
 public:
  /// Throws SingularityError (carrying the smallest eigenvalue) when m is not
  /// positive definite.
  explicit Cholesky(const DenseMatrix& m);

  Vector solve(std::span<const double> b) const;
  std::size_t size() const noexcept { return factor_.rows(); }

 private:
  DenseMatrix factor_;
};

/// Solves m x = b for SPD m with one step of iterative refinement.
Vector solve_spd(const DenseMatrix& m, std::span<const double> b);

}  // namespace merkit::linalg
