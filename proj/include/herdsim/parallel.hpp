#pragma once

#include <cstddef>
#include <functional>

namespace herdsim {

/// Process-wide worker count. 0 = pick from HERDSIM_THREADS, falling back to
/// the hardware concurrency. Results never depend on this value: parallel
/// loops only ever write disjoint slots from immutable inputs.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Run fn(i) for i in [0, n), statically chunked over the worker threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace herdsim
