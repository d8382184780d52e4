#pragma once

#include <cstddef>
#include <functional>

namespace ktop {

// Worker count: KTOP_WORKERS env var when set, otherwise the hardware
// concurrency. Always at least 1.
int default_workers();

// Runs fn(0..n-1) on a pool of `workers` threads. Callers own result slots
// indexed by i, so the outcome is independent of scheduling. The first
// exception thrown by any task is rethrown after the pool drains.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace ktop
