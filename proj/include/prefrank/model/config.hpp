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

#include <numeric>
#include <string>
#include <vector>

#include "prefrank/core/activation.hpp"
#include "prefrank/core/common.hpp"

namespace prefrank {

enum class Aggregator { kAttentive, kMean };

inline std::string aggregator_name(Aggregator a) {
  return a == Aggregator::kAttentive ? "attentive" : "mean";
}

inline Aggregator aggregator_from_name(const std::string& s) {
  if (s == "attentive") return Aggregator::kAttentive;
  if (s == "mean") return Aggregator::kMean;
  throw ConfigError("unknown aggregator '" + s + "' (expected attentive|mean)");
}

// Architecture of the K-task representation stack: a lookup table feeding
// K-1 attentive graph convolutional layers. Task l trains representation
// set l; the concatenation of all K sets scores at evaluation time.
struct ModelConfig {
  int tasks = 2;                    // K
  std::vector<Index> layer_dims;    // d_0 .. d_{K-1}
  Activation activation = Activation::leaky_relu(0.2);
  bool attention_logit_activation = true;  // apply activation to the final logit
  Index attention_dim = 0;                 // hidden width of the attention MLP; 0 = d_{l-1}
  Aggregator aggregator = Aggregator::kAttentive;
  double dropout_p = 0.1;

  Index total_eval_dim() const {
    return std::accumulate(layer_dims.begin(), layer_dims.end(), Index(0));
  }

  Index att_dim_for_layer(int layer) const {
    return attention_dim > 0 ? attention_dim
                             : layer_dims[static_cast<std::size_t>(layer) - 1];
  }

  // Evenly divides a target concatenated width across the K sets.
  static std::vector<Index> even_dims(int tasks, Index total_dim) {
    if (tasks < 1) throw ConfigError("tasks must be >= 1");
    if (total_dim < tasks || total_dim % tasks != 0) {
      throw ConfigError("total_dim " + std::to_string(total_dim) +
                        " not divisible by tasks " + std::to_string(tasks));
    }
    return std::vector<Index>(static_cast<std::size_t>(tasks), total_dim / tasks);
  }

  void validate() const {
    if (tasks < 1) throw ConfigError("tasks must be >= 1");
    if (layer_dims.size() != static_cast<std::size_t>(tasks)) {
      throw ConfigError("layer_dims has " + std::to_string(layer_dims.size()) +
                        " entries for " + std::to_string(tasks) + " tasks");
    }
    for (Index d : layer_dims) {
      if (d < 1) throw ConfigError("layer dimensions must be >= 1");
    }
    if (attention_dim < 0) throw ConfigError("attention_dim must be >= 0");
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
      throw ConfigError("dropout_p must be in [0, 1)");
    }
  }
};

}  // namespace prefrank
