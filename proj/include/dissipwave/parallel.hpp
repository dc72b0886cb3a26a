#pragma once

#include <cstddef>
#include <functional>

namespace dissipwave {

/// Process-wide worker count used by the parallel helpers (default 1).
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count). Each index is visited exactly once;
/// callers write results into index-owned slots so the output does not
/// depend on the worker count. If bodies throw, the exception from the lowest
/// failing index is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dissipwave
