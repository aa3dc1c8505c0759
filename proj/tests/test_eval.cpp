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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "prefrank/eval/metrics.hpp"
#include "support/oracle.hpp"
#include "support/synth.hpp"

namespace prefrank {
namespace {

using testing::all_train_split;
using testing::oracle_ndcg;
using testing::oracle_recall;
using testing::oracle_topn;
using testing::random_corpus;

std::vector<Index> sorted_ids(std::initializer_list<Index> ids) {
  std::vector<Index> v(ids);
  std::sort(v.begin(), v.end());
  return v;
}

TEST(RankItems, EqualScoresBreakTiesByAscendingId) {
  std::vector<double> scores(8, 1.5);
  auto top = rank_items(scores, sorted_ids({2, 5}), 4);
  EXPECT_EQ(top, (std::vector<Index>{0, 1, 3, 4}));
}

TEST(RankItems, CapsAtAvailableUnmaskedItems) {
  std::vector<double> scores{0.1, 0.9, 0.5};
  auto top = rank_items(scores, sorted_ids({0, 2}), 10);
  EXPECT_EQ(top, (std::vector<Index>{1}));
}

TEST(RankItems, DescendingScoreOrder) {
  std::vector<double> scores{0.1, 0.9, -0.3, 0.9, 0.5};
  auto top = rank_items(scores, {}, 5);
  EXPECT_EQ(top, (std::vector<Index>{1, 3, 4, 0, 2}));
}

TEST(RankItems, MatchesFullSortOracle) {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(50);
    for (double& s : scores) s = rng.uniform(-2.0, 2.0);
    if (trial % 3 == 0) {
      // Force duplicate scores so tie-breaking gets exercised.
      for (std::size_t j = 0; j + 1 < scores.size(); j += 2) {
        scores[j + 1] = scores[j];
      }
    }
    std::vector<Index> mask;
    for (Index j = 0; j < 50; ++j) {
      if (rng.uniform() < 0.2) mask.push_back(j);
    }
    const int n = 1 + static_cast<int>(rng.uniform_int(20));
    EXPECT_EQ(rank_items(scores, mask, n), oracle_topn(scores, mask, n));
  }
}

TEST(RankItems, PositiveScalingLeavesOrderUnchanged) {
  Rng rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(30), scaled(30);
    for (std::size_t j = 0; j < 30; ++j) {
      scores[j] = rng.uniform(-1.0, 1.0);
      scaled[j] = 2.5 * scores[j];
    }
    EXPECT_EQ(rank_items(scores, {}, 10), rank_items(scaled, {}, 10));
  }
}

TEST(Recall, SpotValues) {
  EXPECT_DOUBLE_EQ(recall_at_n({1, 2, 3}, sorted_ids({1, 2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_n({4, 5, 6}, sorted_ids({1, 2, 3})), 0.0);
  EXPECT_DOUBLE_EQ(recall_at_n({1, 9, 8, 7}, sorted_ids({1, 2, 3, 4})), 0.25);
  EXPECT_THROW(recall_at_n({1}, {}), ConfigError);
}

TEST(Ndcg, SpotValues) {
  EXPECT_DOUBLE_EQ(ndcg_at_n({7, 1, 2}, sorted_ids({7}), 3), 1.0);
  EXPECT_DOUBLE_EQ(ndcg_at_n({1, 2, 7}, sorted_ids({7}), 3), 0.5);
  EXPECT_DOUBLE_EQ(ndcg_at_n({1, 2, 3}, sorted_ids({7}), 3), 0.0);
  EXPECT_THROW(ndcg_at_n({1}, {}, 3), ConfigError);
  EXPECT_THROW(ndcg_at_n({1}, sorted_ids({1}), 0), ConfigError);
}

TEST(Metrics, MatchLoopOracles) {
  Rng rng(456);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(15));
    std::vector<Index> topn;
    for (int j = 0; j < n; ++j) {
      Index id = static_cast<Index>(rng.uniform_int(40));
      if (std::find(topn.begin(), topn.end(), id) == topn.end()) topn.push_back(id);
    }
    std::vector<Index> relevant;
    for (Index j = 0; j < 40; ++j) {
      if (rng.uniform() < 0.15) relevant.push_back(j);
    }
    if (relevant.empty()) relevant.push_back(0);
    EXPECT_NEAR(recall_at_n(topn, relevant), oracle_recall(topn, relevant), 1e-12);
    EXPECT_NEAR(ndcg_at_n(topn, relevant, n),
                oracle_ndcg(topn, relevant, n), 1e-12);
  }
}

TEST(Metrics, ReplacingAMissWithAHitNeverHurts) {
  Rng rng(789);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Index> relevant = sorted_ids({3, 11, 17, 25});
    std::vector<Index> topn;
    for (int j = 0; j < 8; ++j) {
      topn.push_back(static_cast<Index>(rng.uniform_int(30)));
    }
    std::vector<Index> improved = topn;
    for (std::size_t p = 0; p < improved.size(); ++p) {
      const bool miss = !std::binary_search(relevant.begin(), relevant.end(),
                                            improved[p]);
      const bool unused = std::find(improved.begin(), improved.end(), 17) ==
                          improved.end();
      if (miss && unused) {
        improved[p] = 17;
        break;
      }
    }
    EXPECT_GE(recall_at_n(improved, relevant), recall_at_n(topn, relevant));
    EXPECT_GE(ndcg_at_n(improved, relevant, 8) + 1e-15,
              ndcg_at_n(topn, relevant, 8));
  }
}

// Split with explicit per-user train/valid/test lists for masking tests.
SplitCorpus handmade_split(Index num_users, Index num_items,
                           const std::vector<std::vector<Index>>& train,
                           const std::vector<std::vector<Index>>& valid,
                           const std::vector<std::vector<Index>>& test) {
  std::vector<std::vector<Index>> all = train;
  for (Index u = 0; u < num_users; ++u) {
    auto& row = all[static_cast<std::size_t>(u)];
    row.insert(row.end(), valid[static_cast<std::size_t>(u)].begin(),
               valid[static_cast<std::size_t>(u)].end());
    row.insert(row.end(), test[static_cast<std::size_t>(u)].begin(),
               test[static_cast<std::size_t>(u)].end());
    std::sort(row.begin(), row.end());
  }
  std::vector<std::string> ukeys, ikeys;
  for (Index u = 0; u < num_users; ++u) ukeys.push_back(testing::ukey(u));
  for (Index i = 0; i < num_items; ++i) ikeys.push_back(testing::ikey(i));
  auto corpus = InteractionCorpus::from_parts(ukeys, ikeys, all);
  auto sp = all_train_split(corpus);
  for (Index u = 0; u < num_users; ++u) {
    sp.mutable_train(u) = train[static_cast<std::size_t>(u)];
    sp.mutable_valid(u) = valid[static_cast<std::size_t>(u)];
    sp.mutable_test(u) = test[static_cast<std::size_t>(u)];
  }
  return sp;
}

// Embedding whose user-item dot product is 10 exactly on chosen pairs.
Matrix<double> indicator_embedding(const SplitCorpus& sp,
                                   const std::vector<std::vector<Index>>& liked) {
  const Index m = sp.num_users();
  const Index n = sp.num_items();
  Matrix<double> emb = Matrix<double>::Zero(m + n, n);
  for (Index u = 0; u < m; ++u) {
    for (Index i : liked[static_cast<std::size_t>(u)]) emb(u, i) = 10.0;
  }
  for (Index i = 0; i < n; ++i) emb(m + i, i) = 1.0;
  return emb;
}

TEST(Evaluate, PerfectScoresGiveUnitMetrics) {
  std::vector<std::vector<Index>> train{{0}, {1}};
  std::vector<std::vector<Index>> valid{{}, {}};
  std::vector<std::vector<Index>> test{{2, 3}, {4}};
  auto sp = handmade_split(2, 6, train, valid, test);
  auto emb = indicator_embedding(sp, test);
  auto report = evaluate(emb, sp, EvalTarget::kTest, 5);
  EXPECT_EQ(report.users_evaluated, 2);
  EXPECT_EQ(report.users_skipped, 0);
  EXPECT_DOUBLE_EQ(report.recall, 1.0);
  EXPECT_DOUBLE_EQ(report.ndcg, 1.0);
}

TEST(Evaluate, TrainAndValidationAreMaskedForTestTarget) {
  // Train and valid items carry the highest scores; if masking failed they
  // would occupy the single top slot and recall would drop to zero.
  std::vector<std::vector<Index>> train{{0}};
  std::vector<std::vector<Index>> valid{{1}};
  std::vector<std::vector<Index>> test{{2}};
  auto sp = handmade_split(1, 4, train, valid, test);
  Matrix<double> emb = Matrix<double>::Zero(5, 1);
  emb(0, 0) = 1.0;
  emb(1, 0) = 50.0;  // item 0, train
  emb(2, 0) = 40.0;  // item 1, valid
  emb(3, 0) = 30.0;  // item 2, test
  emb(4, 0) = 20.0;  // item 3
  auto report = evaluate(emb, sp, EvalTarget::kTest, 1);
  EXPECT_DOUBLE_EQ(report.recall, 1.0);
}

TEST(Evaluate, ValidationTargetMasksOnlyTrain) {
  // The test item outscores the validation item and is not masked when the
  // validation set is the target, so it takes the top slot.
  std::vector<std::vector<Index>> train{{0}};
  std::vector<std::vector<Index>> valid{{1}};
  std::vector<std::vector<Index>> test{{2}};
  auto sp = handmade_split(1, 4, train, valid, test);
  Matrix<double> emb = Matrix<double>::Zero(5, 1);
  emb(0, 0) = 1.0;
  emb(1, 0) = 50.0;
  emb(2, 0) = 30.0;
  emb(3, 0) = 40.0;
  emb(4, 0) = 20.0;
  auto at1 = evaluate(emb, sp, EvalTarget::kValidation, 1);
  EXPECT_DOUBLE_EQ(at1.recall, 0.0);
  auto at2 = evaluate(emb, sp, EvalTarget::kValidation, 2);
  EXPECT_DOUBLE_EQ(at2.recall, 1.0);
}

TEST(Evaluate, UsersWithoutTargetAreSkipped) {
  std::vector<std::vector<Index>> train{{0}, {1}, {2}};
  std::vector<std::vector<Index>> valid{{}, {}, {}};
  std::vector<std::vector<Index>> test{{3}, {}, {4}};
  auto sp = handmade_split(3, 5, train, valid, test);
  auto emb = indicator_embedding(sp, test);
  auto report = evaluate(emb, sp, EvalTarget::kTest, 3, /*keep_per_user=*/true);
  EXPECT_EQ(report.users_evaluated, 2);
  EXPECT_EQ(report.users_skipped, 1);
  ASSERT_EQ(report.per_user.size(), 2u);
  EXPECT_EQ(report.per_user[0].user, 0);
  EXPECT_EQ(report.per_user[1].user, 2);
}

TEST(Evaluate, ReportMeansEqualPerUserMeans) {
  auto corpus = random_corpus(12, 15, 3, 8, 99);
  auto sp = split(corpus, 0.3, 0.25, 5);
  Rng rng(100);
  Matrix<double> emb(corpus.num_users() + corpus.num_items(), 6);
  for (Index r = 0; r < emb.rows(); ++r) {
    for (Index c = 0; c < emb.cols(); ++c) emb(r, c) = rng.uniform(-1, 1);
  }
  auto report = evaluate(emb, sp, EvalTarget::kTest, 4, true);
  ASSERT_EQ(static_cast<Index>(report.per_user.size()), report.users_evaluated);
  double recall_sum = 0, ndcg_sum = 0;
  for (const auto& u : report.per_user) {
    recall_sum += u.recall;
    ndcg_sum += u.ndcg;
  }
  const double k = static_cast<double>(report.per_user.size());
  EXPECT_NEAR(report.recall, recall_sum / k, 1e-12);
  EXPECT_NEAR(report.ndcg, ndcg_sum / k, 1e-12);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  auto corpus = random_corpus(15, 20, 3, 9, 111);
  auto sp = split(corpus, 0.3, 0.25, 9);
  Rng rng(112);
  Matrix<double> emb(corpus.num_users() + corpus.num_items(), 8);
  for (Index r = 0; r < emb.rows(); ++r) {
    for (Index c = 0; c < emb.cols(); ++c) emb(r, c) = rng.uniform(-1, 1);
  }
  auto one = evaluate(emb, sp, EvalTarget::kTest, 5, true, 1);
  for (int threads : {2, 3, 7}) {
    auto multi = evaluate(emb, sp, EvalTarget::kTest, 5, true, threads);
    EXPECT_EQ(one.recall, multi.recall);
    EXPECT_EQ(one.ndcg, multi.ndcg);
    EXPECT_EQ(one.users_evaluated, multi.users_evaluated);
    ASSERT_EQ(one.per_user.size(), multi.per_user.size());
    for (std::size_t k = 0; k < one.per_user.size(); ++k) {
      EXPECT_EQ(one.per_user[k].user, multi.per_user[k].user);
      EXPECT_EQ(one.per_user[k].recall, multi.per_user[k].recall);
      EXPECT_EQ(one.per_user[k].ndcg, multi.per_user[k].ndcg);
    }
  }
}

TEST(Evaluate, RandomScoresRecallNearChanceLevel) {
  // One train and one test item out of 21; 20 candidates stay unmasked, so
  // expected recall at cutoff 5 is 5/20 = 0.25.
  const Index m = 40, n = 21;
  std::vector<std::vector<Index>> train, valid, test;
  for (Index u = 0; u < m; ++u) {
    train.push_back({u % n});
    valid.push_back({});
    test.push_back({(u + 1) % n});
  }
  auto sp = handmade_split(m, n, train, valid, test);
  double total = 0;
  int samples = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(1000 + seed);
    Matrix<double> emb(m + n, 4);
    for (Index r = 0; r < emb.rows(); ++r) {
      for (Index c = 0; c < emb.cols(); ++c) emb(r, c) = rng.uniform(-1, 1);
    }
    auto report = evaluate(emb, sp, EvalTarget::kTest, 5);
    total += report.recall * static_cast<double>(report.users_evaluated);
    samples += static_cast<int>(report.users_evaluated);
  }
  EXPECT_NEAR(total / samples, 0.25, 0.05);
}

TEST(Evaluate, RejectsBadArguments) {
  auto corpus = random_corpus(4, 5, 2, 3, 131);
  auto sp = split(corpus, 0.4, 0.0, 3);
  const Index total = sp.num_users() + sp.num_items();
  Matrix<double> emb = Matrix<double>::Zero(total - 1, 2);
  EXPECT_THROW(evaluate(emb, sp, EvalTarget::kTest, 5), ShapeError);
  Matrix<double> ok = Matrix<double>::Zero(total, 2);
  EXPECT_THROW(evaluate(ok, sp, EvalTarget::kTest, 0), ConfigError);
  EXPECT_THROW(evaluate(ok, sp, EvalTarget::kTest, 5, false, 0), ConfigError);
}

}  // namespace
}  // namespace prefrank
