#pragma once

#include <cstddef>
#include <functional>

namespace freeclt {

/// Worker count from FREECLT_THREADS (unset or 0 means hardware concurrency).
unsigned thread_count();

/// Splits [0, n) into contiguous strips, one per worker, and runs body(begin, end)
/// on each. Exceptions from any strip are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace freeclt
