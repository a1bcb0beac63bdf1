#pragma once

#include <cstddef>
#include <functional>

namespace hifreq {

/// Worker count: HIFREQ_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Calls body(begin, end) over disjoint contiguous chunks of [0, n).
/// Chunks are fixed by n and thread_count(), so results are deterministic as
/// long as body writes only to its own range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hifreq
