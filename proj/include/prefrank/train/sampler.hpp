// Copyright 2026 The prefrank Authors
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

#pragma once

#include <vector>

#include "prefrank/core/common.hpp"
#include "prefrank/data/split.hpp"

namespace prefrank {

// One BPR training triple: the user prefers pos over neg.
struct Triple {
  Index user;
  Index pos;
  Index neg;
};

// Draws a negative item for `user` by rejection sampling: uniform over all
// items, retried until the draw is not in the user's training set.
// Requires train_degree(user) < num_items, otherwise no negative exists.
inline Index sample_negative(const SplitCorpus& split, Index user, Rng& rng) {
  if (split.train_degree(user) >= split.num_items()) {
    throw ConfigError("user " + std::to_string(user) +
                      " interacts with every item; no negative sample exists");
  }
  for (;;) {
    Index j = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(split.num_items())));
    if (!split.in_train(user, j)) return j;
  }
}

// Builds one epoch's triples: every training interaction (u, i) paired with
// a fresh negative, then shuffled. Users with no training items contribute
// nothing.
inline std::vector<Triple> sample_epoch(const SplitCorpus& split, Rng& rng) {
  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(split.num_train()));
  for (Index u = 0; u < split.num_users(); ++u) {
    for (Index i : split.train_items(u)) {
      triples.push_back({u, i, sample_negative(split, u, rng)});
    }
  }
  rng.shuffle(triples);
  return triples;
}

}  // namespace prefrank
