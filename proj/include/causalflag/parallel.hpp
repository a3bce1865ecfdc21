#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace causalflag {

/// Worker cap: CAUSALFLAG_THREADS if set (>= 1), else the hardware concurrency.
int worker_count();

/// Calls body(i) for every i in [0, n) on up to worker_count() threads, with
/// contiguous static chunks. Callers write results by index, so the outcome does
/// not depend on the worker count. The exception from the lowest chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace causalflag
