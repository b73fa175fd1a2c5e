// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace class_atlas {

namespace detail {
inline std::atomic<int>& worker_override() {
  static std::atomic<int> value{-1};
  return value;
}
}  // namespace detail

/// Overrides the worker count for the whole process; 0 restores env/auto.
inline void set_worker_count(int workers) { detail::worker_override() = workers > 0 ? workers : -1; }

/// Number of workers for parallel loops: explicit override, then
/// CLASS_ATLAS_THREADS (0 = auto), then hardware concurrency.
inline std::size_t worker_count() {
  const int forced = detail::worker_override();
  if (forced > 0) return static_cast<std::size_t>(forced);
  if (const char* env = std::getenv("CLASS_ATLAS_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) return static_cast<std::size_t>(parsed);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count). Work is split into contiguous chunks,
/// one per worker; body must only write state owned by index i.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace class_atlas
