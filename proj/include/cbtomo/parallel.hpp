#pragma once

#include <cstddef>
#include <functional>

namespace cbtomo {

// Process-wide default worker count used when a call passes threads = 0.
void set_default_threads(unsigned threads);
unsigned default_threads();

// Calls fn(i) for i in [0, n). Work items are claimed dynamically, so callers
// must write results into per-index slots. If any call throws, the exception
// with the lowest index is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace cbtomo
