#pragma once

// Deterministic chunked parallel map: results land by index, so any
// reduction done afterwards in index order is bit-reproducible.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfres {

inline constexpr std::size_t kParallelBlock = std::size_t(1) << 16;

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// out[i] = fn(i) for i < count, evaluated in blocks across `threads` workers.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn fn, std::size_t block = kParallelBlock) {
  std::vector<T> out(count);
  threads = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>((count + block - 1) / block));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t start = next.fetch_add(block);
        if (start >= count) return;
        const std::size_t stop = std::min(count, start + block);
        for (std::size_t i = start; i < stop; ++i) out[i] = fn(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace mfres
