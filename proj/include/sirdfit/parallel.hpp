#pragma once

#include <cstddef>
#include <functional>

namespace sirdfit {

/// Resolves a requested worker count: 0 means "use the hardware", anything
/// else is taken literally (the --threads flag caps but never changes
/// results).
int resolve_threads(int requested);

/// Runs fn(begin, end) over a static contiguous partition of [0, n) with
/// `n_threads` workers. Every index is handled exactly once and workers
/// never share output slots, so results do not depend on the worker count.
void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace sirdfit
