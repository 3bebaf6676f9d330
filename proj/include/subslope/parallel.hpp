#pragma once

#include <cstddef>
#include <functional>

namespace subslope {

/// Number of worker threads used by per-point loops. 1 (the default) runs inline.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, count). Iterations must be independent; each index
/// is visited exactly once, so results written per-index are identical for any
/// thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace subslope
