#pragma once

#include <cstddef>
#include <functional>

namespace wavesep::util {

/// Runs fn(0..n-1) on up to `threads` workers (at least one). Indices are
/// handed out in order; each index runs exactly once. The first exception
/// thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int hardware_threads();

}  // namespace wavesep::util
