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

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "prefrank/data/interactions.hpp"
#include "prefrank/model/config.hpp"
#include "prefrank/train/trainer.hpp"

namespace prefrank {

// Every knob of a run in one flat key = value file. Unknown keys are
// rejected so typos fail loudly instead of silently using a default.
// CLI --set overrides reuse the same key names.
struct RunConfig {
  // data preparation
  std::string raw_path;
  std::string input_format = "pairs";  // pairs | adjacency
  std::int64_t min_core = 10;
  double test_fraction = 0.2;
  double valid_fraction = 0.125;

  // artifacts
  std::string corpus;
  std::string out_dir = ".";  // checkpoint/log/report live here

  // model architecture
  std::int64_t tasks = 2;          // K, number of representation sets
  std::int64_t total_dim = 256;    // concatenated eval dimension, split evenly
  std::int64_t attention_dim = 0;  // 0: same as the layer's input width
  std::string aggregator = "attentive";  // attentive | mean
  std::string activation = "leaky_relu";
  double leaky_slope = 0.2;
  bool attention_logit_activation = true;

  // optimization
  double lr = 1e-4;
  double l2 = 1e-6;
  bool l2_embedding_only = false;
  double dropout = 0.1;
  std::int64_t batch_size = 1024;
  std::int64_t max_epochs = 400;
  std::int64_t patience = 10;
  bool train_with_validation = false;  // fold validation into train for the final fit

  // evaluation
  std::int64_t cutoff = 20;
  bool per_user_report = false;

  // execution
  std::uint64_t seed = 1;
  std::int64_t threads = 1;
  std::string precision = "float64";  // float64 | float32

  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::string resolved_text() const;

  ModelConfig model_config() const {
    ModelConfig cfg;
    cfg.tasks = static_cast<int>(tasks);
    cfg.layer_dims = ModelConfig::even_dims(static_cast<int>(tasks), total_dim);
    cfg.activation = Activation{act_from_name(activation), leaky_slope};
    cfg.attention_logit_activation = attention_logit_activation;
    cfg.attention_dim = attention_dim;
    cfg.aggregator = aggregator_from_name(aggregator);
    cfg.dropout_p = dropout;
    return cfg;
  }

  template <typename Real>
  TrainConfig<Real> train_config() const {
    TrainConfig<Real> cfg;
    cfg.max_epochs = static_cast<int>(max_epochs);
    cfg.batch_size = batch_size;
    cfg.adam.lr = static_cast<Real>(lr);
    cfg.adam.l2 = static_cast<Real>(l2);
    cfg.adam.l2_embedding_only = l2_embedding_only;
    cfg.patience = static_cast<int>(patience);
    cfg.eval_cutoff = static_cast<int>(cutoff);
    cfg.seed = seed;
    cfg.threads = static_cast<int>(threads);
    return cfg;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::int64_t to_int64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::int64_t x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
}

inline std::uint64_t to_uint64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a non-negative integer");
  }
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean (true/false)");
}

inline std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  using detail::to_bool;
  using detail::to_double;
  using detail::to_int64;
  using detail::to_uint64;
  if (key == "raw_path") raw_path = value;
  else if (key == "input_format") input_format = value;
  else if (key == "min_core") min_core = to_int64(key, value);
  else if (key == "test_fraction") test_fraction = to_double(key, value);
  else if (key == "valid_fraction") valid_fraction = to_double(key, value);
  else if (key == "corpus") corpus = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "tasks") tasks = to_int64(key, value);
  else if (key == "total_dim") total_dim = to_int64(key, value);
  else if (key == "attention_dim") attention_dim = to_int64(key, value);
  else if (key == "aggregator") aggregator = value;
  else if (key == "activation") activation = value;
  else if (key == "leaky_slope") leaky_slope = to_double(key, value);
  else if (key == "attention_logit_activation") attention_logit_activation = to_bool(key, value);
  else if (key == "lr") lr = to_double(key, value);
  else if (key == "l2") l2 = to_double(key, value);
  else if (key == "l2_embedding_only") l2_embedding_only = to_bool(key, value);
  else if (key == "dropout") dropout = to_double(key, value);
  else if (key == "batch_size") batch_size = to_int64(key, value);
  else if (key == "max_epochs") max_epochs = to_int64(key, value);
  else if (key == "patience") patience = to_int64(key, value);
  else if (key == "train_with_validation") train_with_validation = to_bool(key, value);
  else if (key == "cutoff") cutoff = to_int64(key, value);
  else if (key == "per_user_report") per_user_report = to_bool(key, value);
  else if (key == "seed") seed = to_uint64(key, value);
  else if (key == "threads") threads = to_int64(key, value);
  else if (key == "precision") precision = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

inline void RunConfig::validate() const {
  input_format_from_name(input_format);  // throws on bad name
  if (min_core < 1) throw ConfigError("min_core must be >= 1");
  if (test_fraction < 0 || test_fraction >= 1) {
    throw ConfigError("test_fraction must be in [0, 1)");
  }
  if (valid_fraction < 0 || valid_fraction >= 1) {
    throw ConfigError("valid_fraction must be in [0, 1)");
  }
  if (tasks < 1 || tasks > 8) {
    throw ConfigError("tasks must be in {1..8}, got " + std::to_string(tasks));
  }
  if (total_dim < tasks) throw ConfigError("total_dim must be >= tasks");
  if (total_dim % tasks != 0) {
    throw ConfigError("total_dim " + std::to_string(total_dim) +
                      " is not divisible by tasks " + std::to_string(tasks));
  }
  if (attention_dim < 0) throw ConfigError("attention_dim must be >= 0");
  aggregator_from_name(aggregator);
  act_from_name(activation);
  if (lr <= 0) throw ConfigError("lr must be positive");
  if (l2 < 0) throw ConfigError("l2 must be non-negative");
  if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must be in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (patience < 0) throw ConfigError("patience must be non-negative");
  if (cutoff < 1) throw ConfigError("cutoff must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (precision != "float64" && precision != "float32") {
    throw ConfigError("precision must be float64 or float32, got '" + precision + "'");
  }
  model_config().validate();  // cross-field checks (dims vs tasks)
}

// Canonical serialization: every key in declaration order, one per line.
// Embedded into checkpoints so a run can be reproduced from its artifact.
inline std::string RunConfig::resolved_text() const {
  using detail::fmt_double;
  std::ostringstream os;
  os << "raw_path = " << raw_path << '\n'
     << "input_format = " << input_format << '\n'
     << "min_core = " << min_core << '\n'
     << "test_fraction = " << fmt_double(test_fraction) << '\n'
     << "valid_fraction = " << fmt_double(valid_fraction) << '\n'
     << "corpus = " << corpus << '\n'
     << "out_dir = " << out_dir << '\n'
     << "tasks = " << tasks << '\n'
     << "total_dim = " << total_dim << '\n'
     << "attention_dim = " << attention_dim << '\n'
     << "aggregator = " << aggregator << '\n'
     << "activation = " << activation << '\n'
     << "leaky_slope = " << fmt_double(leaky_slope) << '\n'
     << "attention_logit_activation = " << (attention_logit_activation ? "true" : "false") << '\n'
     << "lr = " << fmt_double(lr) << '\n'
     << "l2 = " << fmt_double(l2) << '\n'
     << "l2_embedding_only = " << (l2_embedding_only ? "true" : "false") << '\n'
     << "dropout = " << fmt_double(dropout) << '\n'
     << "batch_size = " << batch_size << '\n'
     << "max_epochs = " << max_epochs << '\n'
     << "patience = " << patience << '\n'
     << "train_with_validation = " << (train_with_validation ? "true" : "false") << '\n'
     << "cutoff = " << cutoff << '\n'
     << "per_user_report = " << (per_user_report ? "true" : "false") << '\n'
     << "seed = " << seed << '\n'
     << "threads = " << threads << '\n'
     << "precision = " << precision << '\n';
  return os.str();
}

// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
inline RunConfig parse_run_config_text(const std::string& text,
                                       const std::string& origin = "<config>") {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str(), path);
}

}  // namespace prefrank
