#pragma once

#include <cstdint>
#include <functional>

namespace ergodens {

/// Worker count: explicit request > ERGODENS_THREADS > hardware concurrency.
int effective_threads(int requested = 0);

/// Run fn(begin, end) over a partition of [0, n) on `threads` workers.
/// The partition depends only on n and the fixed chunk granularity, so a
/// reduction that writes disjoint slots is reproducible across thread counts.
void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& fn,
                  int threads = 0);

}  // namespace ergodens
