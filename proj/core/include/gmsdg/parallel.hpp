#pragma once

#include <functional>

namespace gmsdg {

/// Worker count: GMSDG_THREADS when set, hardware concurrency otherwise.
int worker_count();

/// Runs fn(0..n-1) over the workers. Work items must write to disjoint slots;
/// results are then independent of the worker count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace gmsdg
