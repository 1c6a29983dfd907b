// Copyright (c) 2026 The convasr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONVASR_PARALLEL_H_
#define CONVASR_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace convasr {

// Runs fn(0) ... fn(n - 1) on up to `parallelism` threads. Each index runs
// exactly once; callers write results into per-index slots. If any call
// throws, the remaining indices are still drained and the exception of the
// lowest failing index is rethrown, so the outcome does not depend on
// scheduling.
template <typename Fn>
void ParallelFor(size_t n, size_t parallelism, Fn&& fn) {
  if (n == 0) return;
  const size_t workers = std::max<size_t>(1, std::min(parallelism, n));
  std::mutex mu;
  size_t failed_index = n;
  std::exception_ptr failure;

  auto run = [&](size_t i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < failed_index) {
        failed_index = i;
        failure = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          run(i);
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace convasr

#endif  // CONVASR_PARALLEL_H_
