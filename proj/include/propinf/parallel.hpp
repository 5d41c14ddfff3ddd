#pragma once

#include <cstddef>
#include <functional>

namespace propinf {

/// Runs body(i) for i in [0, count) across up to `threads` workers.
/// Work items are independent; the first exception thrown by any worker is
/// rethrown on the calling thread after all workers join. threads <= 1 runs
/// the loop inline.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Hardware concurrency, never less than 1.
unsigned default_threads();

}  // namespace propinf
