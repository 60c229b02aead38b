#pragma once

#include <cstddef>
#include <functional>

namespace plr {

// Worker count used by parallel_for. Resolution order: value set through
// set_thread_count, the PLR_THREADS environment variable, hardware
// concurrency. Always >= 1.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for every i in [0, n) across thread_count() workers with a
// static block partition. Callers must write results into disjoint,
// index-addressed slots; the outcome is then independent of scheduling.
// Exceptions from workers are captured and rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace plr
