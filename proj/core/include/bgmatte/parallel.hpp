#pragma once

#include <cstddef>
#include <functional>

namespace bgmatte {

/// Worker count from BGMATTE_THREADS (0 or unset = hardware concurrency).
int thread_count_from_env();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Iterations must
/// write disjoint data; the first exception thrown is rethrown on the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace bgmatte
