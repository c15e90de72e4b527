#pragma once

#include <cstddef>
#include <functional>

namespace apnorm::detail {

// Worker count: hardware concurrency, capped by APNORM_THREADS and by the
// caller's request (0 = no request).
unsigned worker_count(unsigned requested = 0);

// Runs body(begin, end) over a static partition of [0, n). Chunks are
// disjoint, so results written by index are deterministic.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace apnorm::detail
