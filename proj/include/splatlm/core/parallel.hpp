#pragma once

#include <cstddef>
#include <functional>

namespace splatlm {

// Worker threads used by parallel loops. Defaults to hardware concurrency;
// 1 disables threading.
int thread_count();
void set_thread_count(int n);

// Splits [0, n) into `chunks` contiguous ranges and runs
// fn(chunk_index, begin, end) for each, possibly concurrently. The chunk
// partition depends only on (n, chunks), so per-chunk results are stable
// across thread counts; callers that reduce must merge in chunk order.
void parallel_chunks(std::size_t n, int chunks,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

// Convenience: item-parallel loop with no reduction (disjoint writes only).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace splatlm
