#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace sio {

// Number of worker threads used by parallel loops. Defaults to 1.
void set_worker_count(unsigned count);
unsigned worker_count();

// Calls body(i) for i in [0, n), split into contiguous blocks across workers.
// Each index is handled by exactly one call, so results written per index are
// independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Pairwise (tree) summation in a fixed association order.
double pairwise_sum(std::span<const double> values);

}  // namespace sio
