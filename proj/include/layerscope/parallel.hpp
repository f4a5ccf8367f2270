#pragma once

#include <cstddef>
#include <functional>

namespace layerscope {

/// Worker count: LAYERSCOPE_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() workers. Work items
/// must not depend on execution order. The first exception thrown is rethrown
/// on the calling thread once all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace layerscope
