#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "softcache/errors.hpp"

// Minimal fork-join helper. Work is split into chunks indexed 0..n-1 and the
// caller writes each chunk's result into its own slot, so the outcome is
// identical for any thread count (including 1).

namespace softcache::parallel {

/// Programmatic worker-count override (e.g. a --threads flag); 0 = unset.
/// The SOFTCACHE_THREADS environment variable still wins over this.
inline std::atomic<unsigned>& thread_override() {
  static std::atomic<unsigned> value{0};
  return value;
}

/// Worker count: the SOFTCACHE_THREADS environment variable if set, else the
/// programmatic override, else the hardware concurrency; never less than 1.
inline unsigned thread_count() {
  if (const char* env = std::getenv("SOFTCACHE_THREADS")) {
    const std::string s(env);
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("SOFTCACHE_THREADS must be a positive integer, got '" + s + "'");
    }
    if (pos != s.size() || v == 0 || v > 1024)
      throw ConfigError("SOFTCACHE_THREADS must be a positive integer, got '" + s + "'");
    return static_cast<unsigned>(v);
  }
  if (const unsigned o = thread_override().load()) return o;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(chunk_index) for every index in [0, num_chunks). Chunks are
/// claimed from an atomic counter; the first exception thrown by any chunk
/// is rethrown on the calling thread after all workers finish.
template <class Fn>
void for_each_chunk(std::size_t num_chunks, Fn fn) {
  if (num_chunks == 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), num_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= num_chunks || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace softcache::parallel

namespace softcache {
using parallel::thread_count;
}  // namespace softcache
