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
#include <string>
#include <vector>

#include "prefrank/core/init.hpp"
#include "prefrank/core/param_store.hpp"
#include "prefrank/core/tape.hpp"
#include "prefrank/graph/bipartite.hpp"
#include "prefrank/model/config.hpp"

namespace prefrank {

// The representation stack: embedding lookup table R^0 plus K-1 attentive
// graph convolutional layers producing R^1 .. R^{K-1}.
//
// Each layer transforms row e of its input into
//   v^l_e = act( sum_{j in N(e) u {e}} a^l_ej * v^{l-1}_j * W^l )
// where the weights a^l_ej come from a softmax over a two-layer MLP applied
// to (v^{l-1}_e || v^{l-1}_j), or are 1/(|N(e)|+1) for the mean aggregator.
//
// The neighbor-plus-self lists of all entities are flattened into one entry
// array with contiguous per-entity segments (ascending entity id within each
// segment), which is what the segment_* tape primitives consume.
template <typename Real>
class Network {
 public:
  using Mat = Matrix<Real>;

  Network(ModelConfig config, const BipartiteGraph& graph)
      : cfg_(std::move(config)), m_(graph.num_users()), n_(graph.num_items()) {
    cfg_.validate();
    const Index total = graph.num_entities();
    auto offsets = std::make_shared<std::vector<Index>>();
    auto sources = std::make_shared<std::vector<Index>>();
    auto targets = std::make_shared<std::vector<Index>>();
    offsets->reserve(static_cast<std::size_t>(total) + 1);
    sources->reserve(static_cast<std::size_t>(2 * graph.num_edges() + total));
    targets->reserve(sources->capacity());
    offsets->push_back(0);
    for (Index e = 0; e < total; ++e) {
      auto nbrs = graph.neighbors(e);
      // splice the self id into the ascending neighbor list
      std::size_t k = 0;
      for (; k < nbrs.size() && nbrs[k] < e; ++k) sources->push_back(nbrs[k]);
      sources->push_back(e);
      for (; k < nbrs.size(); ++k) sources->push_back(nbrs[k]);
      for (Index t = 0; t < static_cast<Index>(nbrs.size()) + 1; ++t) {
        targets->push_back(e);
      }
      offsets->push_back(static_cast<Index>(sources->size()));
    }
    offsets_ = std::move(offsets);
    sources_ = std::move(sources);
    targets_ = std::move(targets);

    mean_weights_.resize(static_cast<Index>(sources_->size()), 1);
    for (Index e = 0; e < total; ++e) {
      const Real w = Real(1) / Real(segment_size(e));
      for (Index t = (*offsets_)[static_cast<std::size_t>(e)];
           t < (*offsets_)[static_cast<std::size_t>(e) + 1]; ++t) {
        mean_weights_(t, 0) = w;
      }
    }
  }

  const ModelConfig& config() const { return cfg_; }
  Index num_users() const { return m_; }
  Index num_items() const { return n_; }
  Index num_entities() const { return m_ + n_; }

  // Creates and Xavier-initializes all trainable tensors for this
  // architecture. Attention parameters exist for both aggregators so that a
  // checkpoint's parameter set depends only on the architecture.
  void init_params(ParamStore<Real>& store, std::uint64_t seed) const {
    std::uint64_t ordinal = 0;
    auto fresh = [&](const std::string& name, Index r, Index c) {
      store.add(name, r, c).value =
          xavier_init<Real>(r, c, mix_seed(seed, ordinal++));
    };
    fresh("embedding", num_entities(), cfg_.layer_dims[0]);
    for (int l = 1; l < cfg_.tasks; ++l) {
      const Index din = cfg_.layer_dims[static_cast<std::size_t>(l) - 1];
      const Index dout = cfg_.layer_dims[static_cast<std::size_t>(l)];
      const Index datt = cfg_.att_dim_for_layer(l);
      const std::string p = layer_prefix(l);
      fresh(p + ".weight", din, dout);
      fresh(p + ".att_w1", 2 * din, datt);
      fresh(p + ".att_b1", 1, datt);
      fresh(p + ".att_w2", datt, 1);
      fresh(p + ".att_b2", 1, 1);
    }
  }

  static std::string layer_prefix(int layer) {
    return "conv" + std::to_string(layer);
  }

  // Softmax-normalized weights over each entity's neighbor-plus-self
  // segment, one scalar per entry. For the mean aggregator this is the
  // constant 1/(|N(e)|+1) and the attention MLP is bypassed entirely.
  ValueId attention_weights(Tape<Real>& tape, ParamStore<Real>& store, int layer,
                            ValueId r_prev) const {
    check_layer(layer);
    if (cfg_.aggregator == Aggregator::kMean) {
      return tape.constant_ref(mean_weights_);
    }
    const std::string p = layer_prefix(layer);
    ValueId self_rows = tape.gather_rows(r_prev, targets_);
    ValueId nbr_rows = tape.gather_rows(r_prev, sources_);
    ValueId pair = tape.concat_pairs(self_rows, nbr_rows);
    ValueId hidden = tape.activation(
        tape.affine(pair, tape.parameter(store.at(p + ".att_w1")),
                    tape.parameter(store.at(p + ".att_b1"))),
        cfg_.activation);
    ValueId logit = tape.affine(hidden, tape.parameter(store.at(p + ".att_w2")),
                                tape.parameter(store.at(p + ".att_b2")));
    if (cfg_.attention_logit_activation) {
      logit = tape.activation(logit, cfg_.activation);
    }
    return tape.segment_softmax(logit, offsets_);
  }

  // One attentive graph convolutional layer: weighted neighborhood sum,
  // linear transform, activation.
  ValueId conv_forward(Tape<Real>& tape, ParamStore<Real>& store, int layer,
                       ValueId r_prev, ValueId weights) const {
    check_layer(layer);
    ValueId nbr_rows = tape.gather_rows(r_prev, sources_);
    ValueId pooled = tape.segment_weighted_sum(nbr_rows, weights, offsets_);
    ValueId out = tape.activation(
        tape.matmul(pooled, tape.parameter(store.at(layer_prefix(layer) + ".weight"))),
        cfg_.activation);
    require_finite(tape.val(out), "conv_forward");
    return out;
  }

  // Runs the full stack and returns the K representation sets R^0..R^{K-1}.
  // Dropout is applied to R^0 after lookup and to every layer output, in
  // training mode only; rng may be null in eval mode.
  std::vector<ValueId> forward_all(Tape<Real>& tape, ParamStore<Real>& store,
                                   bool train_mode, Rng* rng) const {
    Param<Real>& emb = store.at("embedding");
    if (emb.rows() != num_entities() ||
        emb.cols() != cfg_.layer_dims[0]) {
      throw ShapeError("embedding table " + shape_str(emb.rows(), emb.cols()) +
                       " does not match graph/config " +
                       shape_str(num_entities(), cfg_.layer_dims[0]));
    }
    if (train_mode && cfg_.dropout_p > 0.0 && rng == nullptr) {
      throw ConfigError("forward_all: dropout requires an rng in training mode");
    }
    const Real p = static_cast<Real>(cfg_.dropout_p);
    std::vector<ValueId> reps;
    reps.reserve(static_cast<std::size_t>(cfg_.tasks));
    ValueId r = tape.parameter(emb);
    if (train_mode && p > Real(0)) r = tape.dropout(r, p, *rng, true);
    reps.push_back(r);
    for (int l = 1; l < cfg_.tasks; ++l) {
      ValueId w = attention_weights(tape, store, l, r);
      ValueId next = conv_forward(tape, store, l, r, w);
      if (train_mode && p > Real(0)) next = tape.dropout(next, p, *rng, true);
      reps.push_back(next);
      r = next;
    }
    return reps;
  }

  // Row-wise concatenation of the K representation sets, (m+n) x sum(d_l).
  Mat eval_embeddings(ParamStore<Real>& store) const {
    Tape<Real> tape;
    auto reps = forward_all(tape, store, /*train_mode=*/false, nullptr);
    Mat out(num_entities(), cfg_.total_eval_dim());
    Index col = 0;
    for (std::size_t l = 0; l < reps.size(); ++l) {
      const Mat& r = tape.val(reps[l]);
      out.middleCols(col, r.cols()) = r;
      col += r.cols();
    }
    return out;
  }

  // Preference score of (user, item): inner product of concatenated rows.
  Real score(const Mat& eval_emb, Index user, Index item) const {
    if (user < 0 || user >= m_) {
      throw ConfigError("score: user id " + std::to_string(user) + " out of range");
    }
    if (item < 0 || item >= n_) {
      throw ConfigError("score: item id " + std::to_string(item) + " out of range");
    }
    return eval_emb.row(user).dot(eval_emb.row(m_ + item));
  }

  // Flattened neighbor-plus-self segment structure (shared with the tape).
  const std::vector<Index>& segment_offsets() const { return *offsets_; }
  const std::vector<Index>& segment_sources() const { return *sources_; }

 private:
  Index segment_size(Index e) const {
    return (*offsets_)[static_cast<std::size_t>(e) + 1] -
           (*offsets_)[static_cast<std::size_t>(e)];
  }

  void check_layer(int layer) const {
    if (layer < 1 || layer >= cfg_.tasks) {
      throw ConfigError("layer " + std::to_string(layer) + " out of range [1, " +
                        std::to_string(cfg_.tasks) + ")");
    }
  }

  ModelConfig cfg_;
  Index m_ = 0;
  Index n_ = 0;
  std::shared_ptr<const std::vector<Index>> offsets_;
  std::shared_ptr<const std::vector<Index>> sources_;
  std::shared_ptr<const std::vector<Index>> targets_;
  Mat mean_weights_;
};

}  // namespace prefrank
