#pragma once

#include <cstddef>
#include <functional>

namespace mcdc {

/// Runs fn(i) for every i in [0, n) on up to `threads` workers (serially when
/// threads <= 1).  Work items must be independent and write only to their own
/// result slots; completion order is unspecified.  The first exception thrown
/// by any item is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace mcdc
