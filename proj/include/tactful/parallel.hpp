#pragma once

#include <cstddef>
#include <functional>

namespace tactful {

// Number of workers to use when `requested` is 0.
unsigned default_thread_count();

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware).
// Each index is visited exactly once; the first exception thrown by any body
// is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace tactful
