#pragma once

#include <cstddef>
#include <functional>

namespace berslab {

/// Worker count: BERSLAB_THREADS if set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads using a fixed contiguous
/// partition. Results must be written to per-index slots; the first exception (lowest
/// index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace berslab
