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

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

#include "prefrank/eval/metrics.hpp"
#include "prefrank/model/network.hpp"
#include "prefrank/train/bpr.hpp"

namespace prefrank {

template <typename Real>
struct TrainConfig {
  int max_epochs = 400;
  Index batch_size = 1024;
  AdamConfig<Real> adam;
  int patience = 10;      // consecutive non-improving epochs tolerated
  int eval_cutoff = 20;   // validation Recall@N driving early stopping
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const {
    if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (patience < 0) throw ConfigError("patience must be non-negative");
    if (eval_cutoff < 1) throw ConfigError("eval_cutoff must be positive");
    if (threads < 1) throw ConfigError("threads must be positive");
  }
};

struct EpochRecord {
  int epoch = 0;          // 1-based
  double loss = 0;        // mean multi-task loss per triple
  double val_recall = std::numeric_limits<double>::quiet_NaN();
  double val_ndcg = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0;     // wall time since fit() started
};

struct FitResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;     // 0 when no validation was available
  double best_recall = 0;
  bool stopped_early = false;
};

// Seed stream tags; epoch-specific streams derive from these via a second mix.
inline constexpr std::uint64_t kSeedSampling = 0x5A17;
inline constexpr std::uint64_t kSeedDropout = 0xD120;

// One pass over all training interactions. Triples are resampled and
// shuffled, then consumed in contiguous batches; each batch runs the full
// model forward, the 1/|batch|-scaled multi-task loss backward, and one
// Adam step. Returns the interaction-weighted mean loss of the epoch.
template <typename Real>
double train_epoch(const Network<Real>& net, ParamStore<Real>& store,
                   const SplitCorpus& split, const TrainConfig<Real>& cfg,
                   int epoch) {
  Rng sample_rng(mix_seed(mix_seed(cfg.seed, kSeedSampling), static_cast<std::uint64_t>(epoch)));
  Rng dropout_rng(mix_seed(mix_seed(cfg.seed, kSeedDropout), static_cast<std::uint64_t>(epoch)));
  std::vector<Triple> triples = sample_epoch(split, sample_rng);
  if (triples.empty()) throw ConfigError("train_epoch: no training interactions");

  double loss_sum = 0;
  for (std::size_t begin = 0; begin < triples.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t end =
        std::min(triples.size(), begin + static_cast<std::size_t>(cfg.batch_size));
    auto batch = BatchIndex<Real>::from_triples(triples, begin, end, net.num_users());
    Tape<Real> tape;
    auto reps = net.forward_all(tape, store, /*train_mode=*/true, &dropout_rng);
    ValueId loss = total_loss(tape, reps, batch, Real(1) / static_cast<Real>(batch.size()));
    const double batch_loss = static_cast<double>(tape.scalar(loss));
    store.zero_grads();
    tape.backward(loss);
    store.adam_step(cfg.adam);
    loss_sum += batch_loss * static_cast<double>(batch.size());
  }
  return loss_sum / static_cast<double>(triples.size());
}

// Full training loop with validation-driven early stopping.
//
// After every epoch the model is evaluated on the validation split at
// Recall@eval_cutoff. The parameter values of the best epoch are kept and
// restored into `store` before returning. An epoch that does not improve
// the best recall increments a counter; training stops once the counter
// reaches `patience` (so patience 0 stops after the first epoch). Without
// validation interactions all epochs run and the final values stay.
//
// Writes one CSV row per epoch to `log` when given; `on_epoch` observes the
// same records, for progress output.
template <typename Real>
FitResult fit(const Network<Real>& net, ParamStore<Real>& store,
              const SplitCorpus& split, const TrainConfig<Real>& cfg,
              std::ostream* log = nullptr,
              const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  const bool has_validation = split.num_valid() > 0;
  if (log) {
    *log << std::setprecision(10) << "epoch,total_loss,val_recall@"
         << cfg.eval_cutoff << ",val_ndcg@" << cfg.eval_cutoff << ",seconds\n";
  }

  FitResult result;
  std::vector<Matrix<Real>> best_values;
  double best_recall = -1;
  int bad_epochs = 0;
  const auto start = std::chrono::steady_clock::now();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = train_epoch(net, store, split, cfg, epoch);
    if (has_validation) {
      Matrix<Real> emb = net.eval_embeddings(store);
      MetricsReport val = evaluate(emb, split, EvalTarget::kValidation,
                                   cfg.eval_cutoff, false, cfg.threads);
      rec.val_recall = val.recall;
      rec.val_ndcg = val.ndcg;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (log) {
      *log << rec.epoch << ',' << rec.loss << ',' << rec.val_recall << ','
           << rec.val_ndcg << ',' << rec.seconds << '\n';
      log->flush();
    }
    if (on_epoch) on_epoch(rec);

    if (has_validation) {
      if (rec.val_recall > best_recall) {
        best_recall = rec.val_recall;
        result.best_epoch = epoch;
        best_values.clear();
        for (const auto& p : store) best_values.push_back(p.value);
        bad_epochs = 0;
      } else {
        ++bad_epochs;
      }
      if (bad_epochs >= cfg.patience) {
        result.stopped_early = epoch < cfg.max_epochs;
        break;
      }
    }
  }

  if (!best_values.empty()) {
    std::size_t i = 0;
    for (auto& p : store) p.value = best_values[i++];
    result.best_recall = best_recall;
  }
  return result;
}

}  // namespace prefrank
