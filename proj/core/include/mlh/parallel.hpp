#pragma once

#include <cstddef>
#include <functional>

namespace mlh {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency; set to 1 to force sequential execution.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(begin, end) over a static partition of [0, n). Each index is
/// processed by exactly one worker, so any computation whose per-index work
/// is independent produces bit-identical results for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace mlh
