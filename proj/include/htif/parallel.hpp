#pragma once

#include <cstddef>
#include <functional>

namespace htif {

// Worker count for replication fan-out: HTIF_THREADS if set to a positive
// integer, otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t replication_threads();

// Calls body(begin, end) on contiguous, disjoint index blocks covering [0, count).
// Blocks are fixed by (count, threads) alone, so callers that write results
// into index-addressed slots get the same output for any thread count.
void parallel_blocks(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace htif
