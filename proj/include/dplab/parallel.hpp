#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dplab {

// 0 means: DPLAB_THREADS if set, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs body(i, acc) over [0, count) in fixed chunks. Chunk boundaries depend
// only on count, and chunk accumulators are returned in chunk order, so any
// ordered fold of the result is independent of the thread count.
template <class Acc, class Body>
std::vector<Acc> run_chunks(long count, unsigned threads, Body body, long chunk = 256) {
  const long nchunks = count <= 0 ? 0 : (count + chunk - 1) / chunk;
  std::vector<Acc> out(nchunks);
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= nchunks) return;
      try {
        const long b = c * chunk, e = std::min(count, b + chunk);
        for (long i = b; i < e; ++i) body(i, out[c]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(nchunks);
        return;
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max(1L, nchunks))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

template <class Acc>
Acc fold(const std::vector<Acc>& parts) {
  Acc total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

}  // namespace dplab
