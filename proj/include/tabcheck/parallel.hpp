#pragma once

#include <cstddef>
#include <functional>

namespace tabcheck {

/// Worker count: TABCHECK_THREADS if set to a positive integer, otherwise
/// the number of hardware threads (at least 1).
std::size_t thread_count();

/// Calls body(begin, end) over contiguous chunks of [0, n). Chunks run on
/// up to thread_count() threads; with one thread the call is inline. The
/// body must only write to per-index state so results do not depend on the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace tabcheck
