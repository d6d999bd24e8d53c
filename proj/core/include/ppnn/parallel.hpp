#pragma once

#include <cstddef>
#include <functional>

namespace ppnn {

// Resolves 0 to the hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

// Runs f(i) for i in [0, n) on up to `threads` workers pulling indices from a
// shared counter. The first exception thrown by any task is rethrown after
// all workers stop; remaining indices are skipped once one task has failed.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f);

}  // namespace ppnn
