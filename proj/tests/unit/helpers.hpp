#pragma once

#include <cmath>
#include <random>

#include "merkit/linalg/dense_matrix.hpp"

namespace merkit::test {

using linalg::DenseMatrix;
using linalg::Vector;

inline DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  DenseMatrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  const DenseMatrix m = random_matrix(1, n, seed);
  return Vector(m.data().begin(), m.data().end());
}

inline DenseMatrix random_spd(std::size_t n, std::uint64_t seed, double shift = 1.0) {
  DenseMatrix g = linalg::gram(random_matrix(n, n, seed));
  for (std::size_t i = 0; i < n; ++i) g(i, i) += shift;
  return g;
}

// Determinant by partial-pivot elimination; used as an independent oracle.
inline double determinant(DenseMatrix a) {
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    }
    if (a(p, c) == 0.0) return 0.0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

}  // namespace merkit::test
