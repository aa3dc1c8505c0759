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
#include <span>
#include <vector>

#include "prefrank/core/common.hpp"
#include "prefrank/data/split.hpp"

namespace prefrank {

// User-item bipartite graph over training interactions, in compressed
// offset + neighbor-array form. Entities are users [0, m) followed by items
// [m, m+n). Neighbor lists are ascending and contain no self-loops;
// self-inclusion is the convolution's job.
class BipartiteGraph {
 public:
  static BipartiteGraph build(const SplitCorpus& split) {
    BipartiteGraph g;
    g.m_ = split.num_users();
    g.n_ = split.num_items();
    const Index total = g.m_ + g.n_;
    if (split.num_train() == 0) {
      throw ConfigError("build_graph: training split is empty");
    }

    std::vector<Index> degree(static_cast<std::size_t>(total), 0);
    for (Index u = 0; u < g.m_; ++u) {
      const auto& items = split.train_items(u);
      degree[static_cast<std::size_t>(u)] = static_cast<Index>(items.size());
      for (Index i : items) degree[static_cast<std::size_t>(g.m_ + i)]++;
    }

    g.offsets_.assign(static_cast<std::size_t>(total) + 1, 0);
    for (Index e = 0; e < total; ++e) {
      g.offsets_[static_cast<std::size_t>(e) + 1] =
          g.offsets_[static_cast<std::size_t>(e)] + degree[static_cast<std::size_t>(e)];
    }
    g.neighbors_.resize(static_cast<std::size_t>(g.offsets_.back()));

    std::vector<Index> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (Index u = 0; u < g.m_; ++u) {
      for (Index i : split.train_items(u)) {
        g.neighbors_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(u)]++)] =
            g.m_ + i;
        g.neighbors_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(g.m_ + i)]++)] =
            u;
      }
    }
    // Sorted adjacency fixes the reduction order regardless of input order.
    for (Index e = 0; e < total; ++e) {
      std::sort(g.neighbors_.begin() + g.offsets_[static_cast<std::size_t>(e)],
                g.neighbors_.begin() + g.offsets_[static_cast<std::size_t>(e) + 1]);
    }
    return g;
  }

  Index num_users() const { return m_; }
  Index num_items() const { return n_; }
  Index num_entities() const { return m_ + n_; }
  Index num_edges() const { return static_cast<Index>(neighbors_.size()) / 2; }

  std::span<const Index> neighbors(Index e) const {
    check(e);
    return {neighbors_.data() + offsets_[static_cast<std::size_t>(e)],
            static_cast<std::size_t>(degree(e))};
  }

  Index degree(Index e) const {
    check(e);
    return offsets_[static_cast<std::size_t>(e) + 1] -
           offsets_[static_cast<std::size_t>(e)];
  }

  bool is_user(Index e) const { return e >= 0 && e < m_; }
  bool is_item(Index e) const { return e >= m_ && e < m_ + n_; }

 private:
  void check(Index e) const {
    if (e < 0 || e >= num_entities()) {
      throw ConfigError("entity id " + std::to_string(e) + " out of range [0, " +
                        std::to_string(num_entities()) + ")");
    }
  }

  Index m_ = 0;
  Index n_ = 0;
  std::vector<Index> offsets_;
  std::vector<Index> neighbors_;
};

inline BipartiteGraph build_graph(const SplitCorpus& split) {
  return BipartiteGraph::build(split);
}

}  // namespace prefrank
