#pragma once

#include <cstddef>
#include <functional>

namespace cemfrac {

/// Sets the worker count for data-parallel kernels; n <= 0 selects all cores.
void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) over contiguous static chunks of [0, n). Bodies must
/// only write to slots owned by their index range; results are then identical
/// for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace cemfrac
