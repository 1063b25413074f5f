#include <atomic>
#include <cstdlib>
#include <string_view>

#include "merkit/simd/kernels.hpp"

namespace merkit::simd {
namespace {

const KernelTable* lookup(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_kernels();
    case Isa::kAvx2:
      return avx2_kernels();
    case Isa::kNeon:
      return neon_kernels();
  }
  return nullptr;
}

const KernelTable* detect() noexcept {
  if (const char* env = std::getenv("MERKIT_SIMD")) {
    const std::string_view want(env);
    const KernelTable* forced = nullptr;
    if (want == "scalar") forced = lookup(Isa::kScalar);
    if (want == "avx2") forced = lookup(Isa::kAvx2);
    if (want == "neon") forced = lookup(Isa::kNeon);
    if (forced != nullptr) return forced;
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept {
  const KernelTable* t = lookup(isa);
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace merkit::simd
