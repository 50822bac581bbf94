#pragma once

#include <cstddef>
#include <functional>

namespace kvdg {

/// Worker count used by parallel loops; 0 selects the hardware concurrency.
void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n) over contiguous chunks. The body must only
/// write to per-index storage; callers merge results serially afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace kvdg
