#include "merkit/linalg/decompositions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "merkit/error.hpp"
#include "merkit/simd/kernels.hpp"

namespace merkit::linalg {
namespace {

constexpr int kMaxSweeps = 100;

void require_square_finite(const DenseMatrix& m, const char* what) {
  if (!m.is_square()) {
    throw DimensionError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  if (!m.all_finite()) throw DataError(std::string(what) + ": matrix has non-finite entries");
}

double off_diagonal_sq(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  }
  return s;
}

}  // namespace

SymEigen sym_eigen(const DenseMatrix& m) {
  require_square_finite(m, "sym_eigen");
  const std::size_t n = m.rows();
  DenseMatrix a = symmetrized(m);
  // Row i of vt is the i-th eigenvector; row rotations stay contiguous.
  DenseMatrix vt = DenseMatrix::identity(n);

  const double scale = frobenius_norm(a);
  const double tol = scale * scale * 1e-32;
  for (int sweep = 0; sweep < kMaxSweeps && n > 1; ++sweep) {
    if (off_diagonal_sq(a) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Element already negligible next to both diagonal entries.
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // J^T A touches rows p and q only; outside the (p, q) block those rows
        // already hold the final values of J^T A J, so mirror them.
        simd::rot(a.row(p), a.row(q), c, s);
        for (std::size_t r = 0; r < n; ++r) {
          a(r, p) = a(p, r);
          a(r, q) = a(q, r);
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        simd::rot(vt.row(p), vt.row(q), c, s);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    const auto v = vt.row(order[k]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v[r];
  }
  return out;
}

DenseMatrix reconstruct(const SymEigen& eig, std::span<const double> values) {
  const std::size_t n = eig.eigenvectors.rows();
  if (values.size() != eig.eigenvectors.cols()) {
    throw DimensionError("reconstruct: eigenvalue count does not match eigenvectors");
  }
  const DenseMatrix vt = transpose(eig.eigenvectors);
  DenseMatrix out(n, n);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] == 0.0) continue;
    const auto v = vt.row(k);
    for (std::size_t r = 0; r < n; ++r) {
      const double w = values[k] * v[r];
      if (w != 0.0) simd::axpy(w, v, out.row(r));
    }
  }
  return symmetrized(out);
}

DenseMatrix clip_eigenvalues(const DenseMatrix& m, double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw ParameterError("clip threshold q must be positive and finite, got " + std::to_string(q));
  }
  require_square_finite(m, "clip_eigenvalues");
  SymEigen eig = sym_eigen(m);
  if (eig.eigenvalues.empty() || eig.eigenvalues.back() >= q) return symmetrized(m);
  Vector clipped = eig.eigenvalues;
  for (double& v : clipped) v = std::max(v, q);
  return reconstruct(eig, clipped);
}

double min_eigenvalue(const DenseMatrix& m) {
  const SymEigen eig = sym_eigen(m);
  return eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
}

Cholesky::Cholesky(const DenseMatrix& m) {
  require_square_finite(m, "cholesky");
  const std::size_t n = m.rows();
  factor_ = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto lj = factor_.row(j).first(j);
    double d = m(j, j) - simd::dot(lj, lj);
    if (!(d > 0.0) || !std::isfinite(d)) {
      const double lambda_min = min_eigenvalue(m);
      std::ostringstream msg;
      msg.precision(6);
      msg << "matrix is not positive definite (min eigenvalue " << lambda_min
          << "); raise the clip threshold q or the ridge lambda";
      throw SingularityError(msg.str(), lambda_min);
    }
    const double ljj = std::sqrt(d);
    factor_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double s = m(i, j) - simd::dot(factor_.row(i).first(j), lj);
      factor_(i, j) = s / ljj;
    }
  }
}

Vector Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = factor_.rows();
  if (b.size() != n) throw DimensionError("cholesky solve: rhs length mismatch");
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (y[i] - simd::dot(factor_.row(i).first(i), std::span<const double>(y).first(i))) /
           factor_(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= factor_(k, ii) * y[k];
    y[ii] = s / factor_(ii, ii);
  }
  return y;
}

Vector solve_spd(const DenseMatrix& m, std::span<const double> b) {
  if (m.rows() != b.size()) {
    throw DimensionError("solve_spd: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " but rhs has length " +
                         std::to_string(b.size()));
  }
  const DenseMatrix sym = symmetrized(m);
  const Cholesky chol(sym);
  Vector x = chol.solve(b);
  Vector r = matvec(sym, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const Vector dx = chol.solve(r);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  return x;
}

}  // namespace merkit::linalg
