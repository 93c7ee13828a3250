#pragma once

#include <cstddef>
#include <functional>

namespace xplain {

// Worker count: XPLAIN_THREADS if set to a positive integer, otherwise the
// machine's hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, count) on up to `workers` threads. Every index
// is visited exactly once; the first exception thrown is rethrown after all
// workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace xplain
