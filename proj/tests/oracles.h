// Copyright 2026 The RLK Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reference implementations used to cross-check the library. Written for
// clarity over speed; sizes stay tiny.

#ifndef RLK_TESTS_ORACLES_H_
#define RLK_TESTS_ORACLES_H_

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace rlk::testing {

// Longest common contiguous token run, by enumerating every start pair.
inline std::size_t brute_lcs(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t k = 0;
      while (i + k < a.size() && j + k < b.size() && a[i + k] == b[j + k]) ++k;
      best = std::max(best, k);
    }
  }
  return best;
}

// Maximum matching by exhaustive search over right-side assignments.
inline std::size_t brute_matching(const std::vector<std::vector<bool>>& adj,
                                  std::size_t right_size, std::size_t left = 0,
                                  unsigned used = 0) {
  if (left == adj.size()) return 0;
  std::size_t best = brute_matching(adj, right_size, left + 1, used);
  for (std::size_t r = 0; r < right_size; ++r) {
    if (adj[left][r] && !(used & (1u << r))) {
      best = std::max(best, 1 + brute_matching(adj, right_size, left + 1,
                                               used | (1u << r)));
    }
  }
  return best;
}

}  // namespace rlk::testing

#endif  // RLK_TESTS_ORACLES_H_
