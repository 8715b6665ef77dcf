#pragma once

#include <functional>

namespace mpt {

/// Number of worker threads: MPT_WORKERS env var if set, else hardware
/// concurrency. Always >= 1.
int worker_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; each
/// index must write only its own output slot, so results are deterministic
/// regardless of the worker count. Exceptions are rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace mpt
