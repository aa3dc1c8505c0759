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
#include <numeric>
#include <thread>
#include <vector>

#include "prefrank/core/tensor.hpp"
#include "prefrank/data/split.hpp"

namespace prefrank {

// Top-n item ids for one user, scored against every item and with the
// masked ids (observed interactions) excluded. Ties break toward the
// smaller item id: the sort key is (-score, id).
//
// scores[j] is the user's score for item j; mask is sorted ascending.
template <typename Real>
std::vector<Index> rank_items(const std::vector<Real>& scores,
                              const std::vector<Index>& mask, int n) {
  if (n < 1) throw ConfigError("rank_items: n must be positive");
  std::vector<Index> ids;
  ids.reserve(scores.size());
  for (Index j = 0; j < static_cast<Index>(scores.size()); ++j) {
    if (!std::binary_search(mask.begin(), mask.end(), j)) ids.push_back(j);
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n), ids.size());
  auto before = [&](Index a, Index b) {
    if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    }
    return a < b;
  };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k),
                    ids.end(), before);
  ids.resize(k);
  return ids;
}

// |topn intersect relevant| / |relevant|; relevant is sorted ascending.
template <typename Real = double>
Real recall_at_n(const std::vector<Index>& topn, const std::vector<Index>& relevant) {
  if (relevant.empty()) throw ConfigError("recall_at_n: empty relevant set");
  Index hits = 0;
  for (Index j : topn) {
    if (std::binary_search(relevant.begin(), relevant.end(), j)) ++hits;
  }
  return static_cast<Real>(hits) / static_cast<Real>(relevant.size());
}

// Binary-relevance NDCG: DCG = sum over hit positions p (1-based) of
// 1/log2(p+1), normalized by the ideal DCG of min(n, |relevant|) leading hits.
template <typename Real = double>
Real ndcg_at_n(const std::vector<Index>& topn, const std::vector<Index>& relevant,
               int n) {
  if (n < 1) throw ConfigError("ndcg_at_n: n must be positive");
  if (relevant.empty()) throw ConfigError("ndcg_at_n: empty relevant set");
  Real dcg = 0;
  for (std::size_t p = 0; p < topn.size(); ++p) {
    if (std::binary_search(relevant.begin(), relevant.end(), topn[p])) {
      dcg += Real(1) / std::log2(static_cast<Real>(p) + 2);
    }
  }
  const std::size_t ideal_hits =
      std::min<std::size_t>(static_cast<std::size_t>(n), relevant.size());
  Real idcg = 0;
  for (std::size_t p = 0; p < ideal_hits; ++p) {
    idcg += Real(1) / std::log2(static_cast<Real>(p) + 2);
  }
  return dcg / idcg;
}

struct UserMetrics {
  Index user;
  double recall;
  double ndcg;
};

struct MetricsReport {
  int cutoff = 0;
  Index users_evaluated = 0;
  Index users_skipped = 0;
  double recall = 0;
  double ndcg = 0;
  std::vector<UserMetrics> per_user;  // filled only when requested
};

// Which sorted id list a user's ranking must exclude and be judged against.
enum class EvalTarget { kTest, kValidation };

// Full-ranking evaluation at one cutoff. For each user with a non-empty
// target set, every item is scored, the user's training interactions (plus
// validation when judging test) are masked, and Recall/NDCG of the top-n
// list are averaged over evaluated users. Users with an empty target set
// are skipped and counted.
//
// The reduction order is fixed (ascending user id) regardless of thread
// count, so results are bit-identical for any `threads`.
template <typename Real>
MetricsReport evaluate(const Matrix<Real>& eval_emb, const SplitCorpus& split,
                       EvalTarget target, int cutoff, bool keep_per_user = false,
                       int threads = 1) {
  if (cutoff < 1) throw ConfigError("evaluate: cutoff must be positive");
  if (threads < 1) throw ConfigError("evaluate: threads must be positive");
  const Index m = split.num_users();
  const Index n = split.num_items();
  if (eval_emb.rows() != m + n) {
    throw ShapeError("evaluate: embedding rows " + std::to_string(eval_emb.rows()) +
                     " do not match entity count " + std::to_string(m + n));
  }

  std::vector<double> recalls(static_cast<std::size_t>(m), -1.0);
  std::vector<double> ndcgs(static_cast<std::size_t>(m), 0.0);

  auto eval_user = [&](Index u) {
    const std::vector<Index>& relevant = target == EvalTarget::kTest
                                             ? split.test_items(u)
                                             : split.valid_items(u);
    if (relevant.empty()) return;
    std::vector<Index> mask = target == EvalTarget::kTest
                                  ? split.train_valid_items(u)
                                  : split.train_items(u);
    std::vector<Real> scores(static_cast<std::size_t>(n));
    const auto user_row = eval_emb.row(u);
    for (Index j = 0; j < n; ++j) {
      scores[static_cast<std::size_t>(j)] = user_row.dot(eval_emb.row(m + j));
    }
    std::vector<Index> topn = rank_items(scores, mask, cutoff);
    recalls[static_cast<std::size_t>(u)] = recall_at_n<double>(topn, relevant);
    ndcgs[static_cast<std::size_t>(u)] = ndcg_at_n<double>(topn, relevant, cutoff);
  };

  if (threads == 1) {
    for (Index u = 0; u < m; ++u) eval_user(u);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (Index u = t; u < m; u += threads) eval_user(u);
      });
    }
    for (auto& th : pool) th.join();
  }

  MetricsReport report;
  report.cutoff = cutoff;
  double recall_sum = 0;
  double ndcg_sum = 0;
  for (Index u = 0; u < m; ++u) {
    if (recalls[static_cast<std::size_t>(u)] < 0) {
      ++report.users_skipped;
      continue;
    }
    ++report.users_evaluated;
    recall_sum += recalls[static_cast<std::size_t>(u)];
    ndcg_sum += ndcgs[static_cast<std::size_t>(u)];
    if (keep_per_user) {
      report.per_user.push_back({u, recalls[static_cast<std::size_t>(u)],
                                 ndcgs[static_cast<std::size_t>(u)]});
    }
  }
  if (report.users_evaluated > 0) {
    report.recall = recall_sum / static_cast<double>(report.users_evaluated);
    report.ndcg = ndcg_sum / static_cast<double>(report.users_evaluated);
  }
  return report;
}

}  // namespace prefrank
