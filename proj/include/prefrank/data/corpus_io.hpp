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
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "prefrank/data/interactions.hpp"
#include "prefrank/data/split.hpp"

namespace prefrank {

inline constexpr const char* kCorpusMagic = "PREFRANK-CORPUS";
inline constexpr const char* kCorpusVersion = "v1";

// Canonical on-disk corpus:
//
//   PREFRANK-CORPUS v1
//   users <m>
//   items <n>
//   seed <split seed>
//   <m user keys, one per line, in id order>
//   <n item keys, one per line, in id order>
//   interactions <count>
//   <count lines "u i S"> with S in {T, V, S} (train/validation/test),
//   ordered by (u, i) ascending.
inline void write_corpus(const std::string& path, const InteractionCorpus& corpus,
                         const SplitCorpus& split) {
  if (split.num_users() != corpus.num_users() ||
      split.num_items() != corpus.num_items()) {
    throw ConfigError("write_corpus: split does not match corpus dimensions");
  }
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical output
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << kCorpusMagic << " " << kCorpusVersion << "\n";
  out << "users " << corpus.num_users() << "\n";
  out << "items " << corpus.num_items() << "\n";
  out << "seed " << split.seed() << "\n";
  for (Index u = 0; u < corpus.num_users(); ++u) out << corpus.user_key(u) << "\n";
  for (Index i = 0; i < corpus.num_items(); ++i) out << corpus.item_key(i) << "\n";
  out << "interactions " << corpus.num_interactions() << "\n";
  for (Index u = 0; u < corpus.num_users(); ++u) {
    std::vector<std::pair<Index, char>> row;
    for (Index i : split.train_items(u)) row.emplace_back(i, 'T');
    for (Index i : split.valid_items(u)) row.emplace_back(i, 'V');
    for (Index i : split.test_items(u)) row.emplace_back(i, 'S');
    std::sort(row.begin(), row.end());
    for (const auto& [i, tag] : row) {
      out << u << " " << i << " " << tag << "\n";
    }
  }
  if (!out) throw IoError("failed writing corpus to '" + path + "'");
}

inline std::pair<InteractionCorpus, SplitCorpus> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IoError("empty corpus file '" + path + "'");
  {
    std::istringstream hs(line);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != kCorpusMagic) {
      throw IoError("'" + path + "' is not a prefrank corpus (bad magic)");
    }
    if (version != kCorpusVersion) {
      throw IoError("corpus version mismatch in '" + path + "': got '" + version +
                    "', expected '" + std::string(kCorpusVersion) + "'");
    }
  }

  auto read_kv = [&](const char* key) -> std::uint64_t {
    if (!std::getline(in, line)) throw IoError("truncated corpus header");
    std::istringstream ls(line);
    std::string k;
    std::uint64_t v;
    if (!(ls >> k >> v) || k != key) {
      throw IoError("corpus header: expected '" + std::string(key) + " <n>', got '" +
                    line + "'");
    }
    return v;
  };

  const Index m = static_cast<Index>(read_kv("users"));
  const Index n = static_cast<Index>(read_kv("items"));
  const std::uint64_t seed = read_kv("seed");

  std::vector<std::string> ukeys, ikeys;
  ukeys.reserve(static_cast<std::size_t>(m));
  ikeys.reserve(static_cast<std::size_t>(n));
  for (Index u = 0; u < m; ++u) {
    if (!std::getline(in, line) || line.empty()) {
      throw IoError("corpus: missing user key " + std::to_string(u));
    }
    ukeys.push_back(line);
  }
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(in, line) || line.empty()) {
      throw IoError("corpus: missing item key " + std::to_string(i));
    }
    ikeys.push_back(line);
  }

  const std::uint64_t count = read_kv("interactions");

  SplitCorpus split(m, n, seed);
  std::vector<std::vector<Index>> items_by_user(static_cast<std::size_t>(m));
  for (std::uint64_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) {
      throw IoError("corpus: expected " + std::to_string(count) +
                    " interactions, file ends after " + std::to_string(k));
    }
    std::istringstream ls(line);
    Index u, i;
    char tag;
    if (!(ls >> u >> i >> tag)) {
      throw IoError("corpus: malformed interaction line '" + line + "'");
    }
    if (u < 0 || u >= m || i < 0 || i >= n) {
      throw IoError("corpus: interaction ids out of range in '" + line + "'");
    }
    items_by_user[static_cast<std::size_t>(u)].push_back(i);
    switch (tag) {
      case 'T': split.mutable_train(u).push_back(i); break;
      case 'V': split.mutable_valid(u).push_back(i); break;
      case 'S': split.mutable_test(u).push_back(i); break;
      default:
        throw IoError("corpus: unknown split tag '" + std::string(1, tag) + "'");
    }
  }

  InteractionCorpus corpus = InteractionCorpus::from_parts(
      std::move(ukeys), std::move(ikeys), std::move(items_by_user));
  return {std::move(corpus), std::move(split)};
}

}  // namespace prefrank
