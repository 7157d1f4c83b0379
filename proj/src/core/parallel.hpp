#ifndef GENREL_PARALLEL_HPP
#define GENREL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace genrel {

// Worker count: GENREL_THREADS env var caps it, 0 or unset means auto.
int worker_count();

// Runs fn(i) for i in [0, count). Work items must be independent; each item
// writes only to its own output slot so the result is schedule-independent.
// Exceptions thrown by fn are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace genrel

#endif
