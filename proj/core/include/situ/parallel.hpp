#pragma once

#include <cstddef>
#include <functional>

namespace situ {

// Calls fn(i) for i in [0, n) on up to `threads` workers, contiguous chunks
// per worker. threads <= 1 runs inline. The first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace situ
