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

// Test-only alignment oracle, deliberately written without any dynamic
// programming so it shares nothing with AlignWords.

#ifndef CONVASR_TESTS_WER_ORACLE_H_
#define CONVASR_TESTS_WER_ORACLE_H_

#include <algorithm>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "convasr/metrics.h"

namespace convasr::testing {

// Exhaustive recursive alignment over every edit path. Among paths of minimal
// total cost it keeps the one with the most substitutions (equivalently the
// fewest deletions, since I - D is fixed by the lengths).
inline EditCounts BruteForceAlign(const std::vector<std::string>& ref,
                                  const std::vector<std::string>& hyp) {
  std::function<std::tuple<size_t, size_t, EditCounts>(size_t, size_t)> go =
      [&](size_t i, size_t j) -> std::tuple<size_t, size_t, EditCounts> {
    if (i == ref.size() && j == hyp.size()) return {0, 0, EditCounts{}};
    std::vector<std::tuple<size_t, size_t, EditCounts>> options;
    if (i < ref.size() && j < hyp.size()) {
      auto [cost, del, c] = go(i + 1, j + 1);
      if (ref[i] != hyp[j]) {
        ++cost;
        ++c.substitutions;
      }
      options.emplace_back(cost, del, c);
    }
    if (i < ref.size()) {
      auto [cost, del, c] = go(i + 1, j);
      ++c.deletions;
      options.emplace_back(cost + 1, del + 1, c);
    }
    if (j < hyp.size()) {
      auto [cost, del, c] = go(i, j + 1);
      ++c.insertions;
      options.emplace_back(cost + 1, del, c);
    }
    return *std::min_element(options.begin(), options.end(),
                             [](const auto& a, const auto& b) {
                               return std::tie(std::get<0>(a), std::get<1>(a)) <
                                      std::tie(std::get<0>(b), std::get<1>(b));
                             });
  };
  return std::get<2>(go(0, 0));
}

// Every sequence of length 0..max_len over {a, b, c}.
inline std::vector<std::vector<std::string>> AllSequences(size_t max_len) {
  const std::vector<std::string> alphabet = {"a", "b", "c"};
  std::vector<std::vector<std::string>> out = {{}};
  std::vector<std::vector<std::string>> frontier = {{}};
  for (size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& seq : frontier) {
      for (const auto& w : alphabet) {
        auto s = seq;
        s.push_back(w);
        next.push_back(s);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace convasr::testing

#endif  // CONVASR_TESTS_WER_ORACLE_H_
