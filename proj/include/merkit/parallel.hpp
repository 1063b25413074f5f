#pragma once

#include <cstddef>
#include <functional>

namespace merkit {

/// Worker count for internal loops: MERKIT_THREADS if set (>= 1), otherwise
/// the hardware concurrency.
std::size_t thread_budget() noexcept;

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index must write
/// only its own outputs; results are then independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace merkit
