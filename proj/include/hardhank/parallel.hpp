#pragma once

#include <cstddef>
#include <functional>

namespace hardhank {

// Worker count: HARDHANK_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned worker_count();

// Runs fn(0) ... fn(tasks - 1) on up to worker_count() threads. Results must be
// written to per-task slots; the first exception thrown is rethrown.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& fn);

}  // namespace hardhank
