// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace stabilimeter {

struct ExecutionPolicy {
  /// Worker count; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;

  static constexpr ExecutionPolicy sequential() { return ExecutionPolicy{1}; }

  unsigned resolved() const {
    if (threads != 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

/// Runs body(i) for i in [0, count). Tasks must only write state owned by
/// their index. If several tasks throw, the exception of the lowest index is
/// rethrown so failures are reported the same way at any thread count.
template <typename Body>
void parallel_for(std::size_t count, ExecutionPolicy policy, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(policy.resolved(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace stabilimeter
