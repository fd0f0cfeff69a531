#pragma once

#include <cstddef>
#include <functional>

namespace coulomb {

// Process-wide worker count used by parallel_for; 1 by default.
void set_thread_count(int threads);
int thread_count();

// Calls body(begin, end) over a static contiguous partition of [0, n).
// Callers write to disjoint outputs per index, so results do not depend on
// the partition; any cross-index reduction is done afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace coulomb
