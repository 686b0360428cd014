#pragma once

#include <cstddef>
#include <functional>

namespace demsr {

// Process-wide worker count used by parallel_for. Thread count never affects
// results: each index is computed independently and written exactly once, so
// set_threads(1) reproduces multi-threaded output bit for bit.
void set_threads(int n);
int threads();

// Runs fn(i) for i in [0, n), splitting the range into contiguous chunks
// across the worker pool. Falls back to the calling thread for small n.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Chunked variant: fn(begin, end) per contiguous block. Preferred in hot
// loops since it amortizes the per-index std::function call.
void parallel_for_chunks(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace demsr
