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

#include <algorithm>
#include <cmath>
#include <vector>

#include "prefrank/core/common.hpp"
#include "prefrank/data/interactions.hpp"

namespace prefrank {

// Per-user partition of a corpus into train/validation/test item lists.
// All lists are ascending; the three sets are disjoint and exhaustive.
class SplitCorpus {
 public:
  SplitCorpus() = default;
  SplitCorpus(Index m, Index n, std::uint64_t seed)
      : m_(m), n_(n), seed_(seed),
        train_(static_cast<std::size_t>(m)),
        valid_(static_cast<std::size_t>(m)),
        test_(static_cast<std::size_t>(m)) {}

  Index num_users() const { return m_; }
  Index num_items() const { return n_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<Index>& train_items(Index u) const { return train_[check(u)]; }
  const std::vector<Index>& valid_items(Index u) const { return valid_[check(u)]; }
  const std::vector<Index>& test_items(Index u) const { return test_[check(u)]; }

  std::vector<Index>& mutable_train(Index u) { return train_[check(u)]; }
  std::vector<Index>& mutable_valid(Index u) { return valid_[check(u)]; }
  std::vector<Index>& mutable_test(Index u) { return test_[check(u)]; }

  bool in_train(Index u, Index i) const {
    const auto& v = train_[check(u)];
    return std::binary_search(v.begin(), v.end(), i);
  }

  Index train_degree(Index u) const {
    return static_cast<Index>(train_[check(u)].size());
  }

  Index num_train() const { return total(train_); }
  Index num_valid() const { return total(valid_); }
  Index num_test() const { return total(test_); }

  // Union of train and validation items of u, ascending. This is the mask
  // used when ranking against the test set.
  std::vector<Index> train_valid_items(Index u) const {
    const auto& a = train_[check(u)];
    const auto& b = valid_[check(u)];
    std::vector<Index> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  // Moves every validation item into the training lists. Used when training
  // a final model after hyper-parameter selection.
  void merge_validation_into_train() {
    for (std::size_t u = 0; u < train_.size(); ++u) {
      auto merged = train_valid_items(static_cast<Index>(u));
      train_[u] = std::move(merged);
      valid_[u].clear();
    }
  }

  bool operator==(const SplitCorpus& o) const {
    return m_ == o.m_ && n_ == o.n_ && seed_ == o.seed_ && train_ == o.train_ &&
           valid_ == o.valid_ && test_ == o.test_;
  }

 private:
  std::size_t check(Index u) const {
    if (u < 0 || u >= m_) {
      throw ConfigError("user id " + std::to_string(u) + " out of range");
    }
    return static_cast<std::size_t>(u);
  }

  static Index total(const std::vector<std::vector<Index>>& v) {
    Index t = 0;
    for (const auto& x : v) t += static_cast<Index>(x.size());
    return t;
  }

  Index m_ = 0;
  Index n_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<Index>> train_, valid_, test_;
};

// Per user: a uniformly random test_frac of the items go to test
// (floor, but at least 1 when the user has >= 2 items), then valid_frac of
// the remainder go to validation (rounded). Deterministic given seed.
inline SplitCorpus split(const InteractionCorpus& corpus, double test_frac,
                         double valid_frac, std::uint64_t seed) {
  if (test_frac < 0.0 || test_frac >= 1.0) {
    throw ConfigError("split: test_frac must be in [0, 1)");
  }
  if (valid_frac < 0.0 || valid_frac >= 1.0) {
    throw ConfigError("split: valid_frac must be in [0, 1)");
  }
  SplitCorpus out(corpus.num_users(), corpus.num_items(), seed);
  for (Index u = 0; u < corpus.num_users(); ++u) {
    std::vector<Index> items = corpus.items_of(u);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(u) + 0x5117ULL));
    rng.shuffle(items);

    const Index deg = static_cast<Index>(items.size());
    Index n_test = static_cast<Index>(std::floor(test_frac * static_cast<double>(deg)));
    if (test_frac > 0.0 && n_test == 0 && deg >= 2) n_test = 1;
    if (n_test >= deg && deg >= 1) n_test = deg - 1;

    const Index rem = deg - n_test;
    Index n_valid = static_cast<Index>(
        std::llround(valid_frac * static_cast<double>(rem)));
    if (n_valid >= rem && rem >= 1) n_valid = rem - 1;

    auto& test = out.mutable_test(u);
    auto& valid = out.mutable_valid(u);
    auto& train = out.mutable_train(u);
    test.assign(items.begin(), items.begin() + n_test);
    valid.assign(items.begin() + n_test, items.begin() + n_test + n_valid);
    train.assign(items.begin() + n_test + n_valid, items.end());
    std::sort(test.begin(), test.end());
    std::sort(valid.begin(), valid.end());
    std::sort(train.begin(), train.end());
  }
  return out;
}

}  // namespace prefrank
