#pragma once

#include <cstdint>
#include <functional>

namespace dslab {

/// Worker count: DOWNSCALE_LAB_THREADS if set (0 = auto), else hardware
/// concurrency. Always >= 1.
int thread_count();

/// Runs fn(i) for i in [0, n). Indices are partitioned into contiguous
/// chunks, one chunk per worker; every index is computed by exactly one
/// worker, so results do not depend on the worker count as long as the
/// per-index work writes only to index-owned outputs.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace dslab
