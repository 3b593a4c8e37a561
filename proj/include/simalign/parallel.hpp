#pragma once

#include <cstddef>
#include <functional>

namespace simalign {

// Worker count from SIMALIGN_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

// Calls body(i) for every i in [0, n) on up to worker_count() threads.
// Callers write results into slot i, so assembly order never depends on
// scheduling. If bodies throw, the exception from the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace simalign
