#pragma once

#include <cstddef>
#include <functional>
#include <mutex>

namespace nlch {

// Worker count from NLCH_THREADS (default 1).
int thread_count();

// Runs body(begin, end) on contiguous chunks of [0, n). Chunks write disjoint
// outputs, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Runs task(i) for i in [0, n), up to thread_count() at a time. Exceptions are
// rethrown on the calling thread (the first one by index).
void parallel_tasks(std::size_t n, const std::function<void(std::size_t)>& task);

// FFTW plan creation and destruction are not thread safe.
std::mutex& fftw_plan_mutex();

}  // namespace nlch
