#pragma once

#include <cstddef>
#include <functional>

namespace tvbeta {

// Worker threads used by the parallel helpers: the TVBETA_THREADS environment
// variable when set, otherwise the hardware concurrency.
unsigned worker_count();

// Runs fn(begin, end) over [0, count) split into fixed-size chunks. The chunk
// layout does not depend on the thread count, so per-chunk sequential state
// (e.g. warm starts) produces identical results on any machine. Nested calls
// run inline on the caller's thread to avoid oversubscription. The first
// exception thrown inside a chunk is rethrown on the caller.
void parallel_chunks(std::size_t count, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// fn(i) for each i in [0, count), independent iterations.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace tvbeta
