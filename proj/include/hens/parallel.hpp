#pragma once

#include <cstddef>
#include <functional>

namespace hens {

// Worker count: hardware concurrency, capped by the HENS_THREADS environment variable.
std::size_t worker_count();

// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers write
// results into pre-sized slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hens
