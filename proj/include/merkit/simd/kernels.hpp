#pragma once

// Inner-loop arithmetic kernels with a scalar reference implementation and
// vectorized variants chosen once per process from the host CPU.
//
// Selection order: MERKIT_SIMD env var ("scalar", "avx2", "neon") if set and
// supported, otherwise the widest supported ISA. Results of the vector paths
// differ from the scalar reference only by floating-point reassociation.

#include <cstddef>
#include <span>

namespace merkit::simd {

enum class Isa { kScalar, kAvx2, kNeon };

const char* to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// (x[i], y[i]) <- (c*x[i] - s*y[i], s*x[i] + c*y[i])
  void (*rot)(double* x, double* y, std::size_t n, double c, double s);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

const KernelTable& active() noexcept;

/// Forces a variant. Returns false (and leaves the selection unchanged) when
/// the variant is unavailable on this host.
bool select(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline void rot(std::span<double> x, std::span<double> y, double c, double s) noexcept {
  active().rot(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size(), c, s);
}

}  // namespace merkit::simd
