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

#include <memory>
#include <vector>

#include "prefrank/core/tape.hpp"
#include "prefrank/train/sampler.hpp"

namespace prefrank {

// Index triple of a minibatch, gathered once and shared by all K losses.
// Item rows are offset by num_users so they address the joint entity table.
template <typename Real>
struct BatchIndex {
  IndexVec users;
  IndexVec pos;
  IndexVec neg;

  static BatchIndex from_triples(const std::vector<Triple>& triples,
                                 std::size_t begin, std::size_t end,
                                 Index num_users) {
    auto u = std::make_shared<std::vector<Index>>();
    auto p = std::make_shared<std::vector<Index>>();
    auto n = std::make_shared<std::vector<Index>>();
    u->reserve(end - begin);
    p->reserve(end - begin);
    n->reserve(end - begin);
    for (std::size_t t = begin; t < end; ++t) {
      u->push_back(triples[t].user);
      p->push_back(num_users + triples[t].pos);
      n->push_back(num_users + triples[t].neg);
    }
    return BatchIndex{std::move(u), std::move(p), std::move(n)};
  }

  std::size_t size() const { return users->size(); }
};

// Pairwise ranking loss of one representation set over one batch:
//   sum_t ln(1 + exp(-(v_u . v_i - v_u . v_j)))
// computed as softplus(-margin) for numerical stability.
template <typename Real>
ValueId bpr_loss(Tape<Real>& tape, ValueId reps, const BatchIndex<Real>& batch) {
  ValueId vu = tape.gather_rows(reps, batch.users);
  ValueId vi = tape.gather_rows(reps, batch.pos);
  ValueId vj = tape.gather_rows(reps, batch.neg);
  ValueId margin = tape.sub(tape.dot_rows(vu, vi), tape.dot_rows(vu, vj));
  return tape.sum(tape.softplus(tape.neg(margin)));
}

// Multi-task objective: the mean of the K per-layer ranking losses,
// optionally scaled (the trainer passes 1/|batch|).
template <typename Real>
ValueId total_loss(Tape<Real>& tape, const std::vector<ValueId>& reps,
                   const BatchIndex<Real>& batch, Real scale = Real(1)) {
  if (reps.empty()) throw ConfigError("total_loss: no representation sets");
  ValueId acc = bpr_loss(tape, reps[0], batch);
  for (std::size_t l = 1; l < reps.size(); ++l) {
    acc = tape.add(acc, bpr_loss(tape, reps[l], batch));
  }
  return tape.scale(acc, scale / static_cast<Real>(reps.size()));
}

}  // namespace prefrank
