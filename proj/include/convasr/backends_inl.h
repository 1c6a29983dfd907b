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

#ifndef CONVASR_BACKENDS_INL_H_
#define CONVASR_BACKENDS_INL_H_

#include <thread>

#include "convasr/error.h"

namespace convasr {

template <typename Fn>
auto WithRetry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  const int attempts = policy.max_attempts < 1 ? 1 : policy.max_attempts;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const BackendError& e) {
      if (!e.transient()) throw;
      if (attempt >= attempts) {
        throw BackendError(e.kind(), "gave up after " +
                                         std::to_string(attempts) +
                                         " attempts: " + e.what());
      }
      auto wait = policy.BackoffFor(attempt);
      if (policy.sleep) {
        policy.sleep(wait);
      } else {
        std::this_thread::sleep_for(wait);
      }
    }
  }
}

}  // namespace convasr

#endif  // CONVASR_BACKENDS_INL_H_
