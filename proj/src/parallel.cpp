#include "tvbeta/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tvbeta {

namespace {
thread_local int nesting_depth = 0;
}

unsigned worker_count() {
  if (const char* env = std::getenv("TVBETA_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void parallel_chunks(std::size_t count, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (chunk == 0) chunk = 1;
  const std::size_t nchunks = (count + chunk - 1) / chunk;
  const unsigned workers = worker_count();

  if (nesting_depth > 0 || workers <= 1 || nchunks <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c)
      fn(c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    ++nesting_depth;
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      try {
        fn(c * chunk, std::min(count, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    --nesting_depth;
  };

  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(workers, nchunks));
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (unsigned i = 0; i + 1 < nthreads; ++i) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();

  if (first_error) std::rethrow_exception(first_error);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  parallel_chunks(count, 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace tvbeta
