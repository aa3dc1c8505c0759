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
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prefrank/core/common.hpp"

namespace prefrank {

// One observed implicit-feedback event, as it appears in the raw file.
struct RawInteraction {
  std::string user_key;
  std::string item_key;
};

enum class InputFormat {
  kPairs,      // one "user_key item_key" per line (tab or space separated)
  kAdjacency,  // "user_key item_key item_key ..." per line
};

inline InputFormat input_format_from_name(const std::string& s) {
  if (s == "pairs") return InputFormat::kPairs;
  if (s == "adjacency") return InputFormat::kAdjacency;
  throw ConfigError("unknown input format '" + s + "' (expected pairs|adjacency)");
}

// Reads every (user_key, item_key) token pair in file order. Duplicates are
// preserved here; deduplication happens at ingest.
inline std::vector<RawInteraction> load_interactions(const std::string& path,
                                                     InputFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open interaction file '" + path + "'");
  std::vector<RawInteraction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(std::move(tok));
    if (tokens.empty()) continue;  // blank line
    if (format == InputFormat::kPairs) {
      if (tokens.size() != 2) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected 'user item', got " +
                         std::to_string(tokens.size()) + " token(s)");
      }
      out.push_back({tokens[0], tokens[1]});
    } else {
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        out.push_back({tokens[0], tokens[k]});
      }
    }
  }
  if (out.empty()) {
    throw ParseError("no interactions found in '" + path + "'");
  }
  return out;
}

// Filtered, deduplicated interaction data with dense ids. Users are
// [0, m), items are [0, n); id order follows first appearance of the
// original keys in the raw stream.
class InteractionCorpus {
 public:
  Index num_users() const { return static_cast<Index>(user_keys_.size()); }
  Index num_items() const { return static_cast<Index>(item_keys_.size()); }
  Index num_interactions() const { return num_interactions_; }

  const std::vector<Index>& items_of(Index user) const {
    check_user(user);
    return items_by_user_[static_cast<std::size_t>(user)];
  }

  Index user_degree(Index user) const {
    return static_cast<Index>(items_of(user).size());
  }

  bool has(Index user, Index item) const {
    const auto& v = items_of(user);
    return std::binary_search(v.begin(), v.end(), item);
  }

  const std::string& user_key(Index user) const {
    check_user(user);
    return user_keys_[static_cast<std::size_t>(user)];
  }
  const std::string& item_key(Index item) const {
    if (item < 0 || item >= num_items()) {
      throw ConfigError("item id " + std::to_string(item) + " out of range");
    }
    return item_keys_[static_cast<std::size_t>(item)];
  }

  // -1 if the key is unknown.
  Index user_id(const std::string& key) const {
    auto it = user_ids_.find(key);
    return it == user_ids_.end() ? -1 : it->second;
  }
  Index item_id(const std::string& key) const {
    auto it = item_ids_.find(key);
    return it == item_ids_.end() ? -1 : it->second;
  }

  double density() const {
    return static_cast<double>(num_interactions_) /
           (static_cast<double>(num_users()) * static_cast<double>(num_items()));
  }

  bool operator==(const InteractionCorpus& o) const {
    return user_keys_ == o.user_keys_ && item_keys_ == o.item_keys_ &&
           items_by_user_ == o.items_by_user_;
  }

  // Construction is done by kcore_filter / read_corpus.
  static InteractionCorpus from_parts(std::vector<std::string> user_keys,
                                      std::vector<std::string> item_keys,
                                      std::vector<std::vector<Index>> items_by_user) {
    InteractionCorpus c;
    c.user_keys_ = std::move(user_keys);
    c.item_keys_ = std::move(item_keys);
    c.items_by_user_ = std::move(items_by_user);
    if (c.items_by_user_.size() != c.user_keys_.size()) {
      throw ConfigError("corpus: user list and adjacency size mismatch");
    }
    c.num_interactions_ = 0;
    for (std::size_t u = 0; u < c.items_by_user_.size(); ++u) {
      auto& v = c.items_by_user_[u];
      std::sort(v.begin(), v.end());
      if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
        throw ConfigError("corpus: duplicate interaction for user " +
                          std::to_string(u));
      }
      for (Index i : v) {
        if (i < 0 || i >= static_cast<Index>(c.item_keys_.size())) {
          throw ConfigError("corpus: item id out of range for user " +
                            std::to_string(u));
        }
      }
      c.num_interactions_ += static_cast<Index>(v.size());
    }
    for (std::size_t u = 0; u < c.user_keys_.size(); ++u) {
      c.user_ids_[c.user_keys_[u]] = static_cast<Index>(u);
    }
    for (std::size_t i = 0; i < c.item_keys_.size(); ++i) {
      c.item_ids_[c.item_keys_[i]] = static_cast<Index>(i);
    }
    if (c.user_ids_.size() != c.user_keys_.size() ||
        c.item_ids_.size() != c.item_keys_.size()) {
      throw ConfigError("corpus: duplicate keys in id map");
    }
    return c;
  }

 private:
  void check_user(Index user) const {
    if (user < 0 || user >= num_users()) {
      throw ConfigError("user id " + std::to_string(user) + " out of range");
    }
  }

  std::vector<std::string> user_keys_;
  std::vector<std::string> item_keys_;
  std::unordered_map<std::string, Index> user_ids_;
  std::unordered_map<std::string, Index> item_ids_;
  std::vector<std::vector<Index>> items_by_user_;
  Index num_interactions_ = 0;
};

// Deduplicates the raw stream and iteratively peels users/items with degree
// below min_core until fixpoint. Survivors get dense ids in first-appearance
// order of their original keys.
inline InteractionCorpus kcore_filter(const std::vector<RawInteraction>& raw,
                                      Index min_core = 10) {
  if (min_core < 1) throw ConfigError("kcore_filter: min_core must be >= 1");

  std::unordered_map<std::string, Index> uidx, iidx;
  std::vector<std::string> ukeys, ikeys;
  std::vector<std::vector<Index>> adj_u;  // user -> items, deduped
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(raw.size() * 2);

  for (const auto& r : raw) {
    if (r.user_key.empty() || r.item_key.empty()) {
      throw ParseError("kcore_filter: empty key in interaction");
    }
    auto [uit, unew] = uidx.try_emplace(r.user_key, static_cast<Index>(ukeys.size()));
    if (unew) {
      ukeys.push_back(r.user_key);
      adj_u.emplace_back();
    }
    auto [iit, inew] = iidx.try_emplace(r.item_key, static_cast<Index>(ikeys.size()));
    if (inew) ikeys.push_back(r.item_key);
    std::uint64_t packed = (static_cast<std::uint64_t>(uit->second) << 32) |
                           static_cast<std::uint64_t>(iit->second);
    if (seen.insert(packed).second) {
      adj_u[static_cast<std::size_t>(uit->second)].push_back(iit->second);
    }
  }

  const Index nu = static_cast<Index>(ukeys.size());
  const Index ni = static_cast<Index>(ikeys.size());

  // item -> users
  std::vector<std::vector<Index>> adj_i(static_cast<std::size_t>(ni));
  for (Index u = 0; u < nu; ++u) {
    for (Index i : adj_u[static_cast<std::size_t>(u)]) {
      adj_i[static_cast<std::size_t>(i)].push_back(u);
    }
  }

  std::vector<Index> udeg(static_cast<std::size_t>(nu)), ideg(static_cast<std::size_t>(ni));
  std::vector<char> ualive(static_cast<std::size_t>(nu), 1), ialive(static_cast<std::size_t>(ni), 1);
  std::vector<Index> queue_u, queue_i;
  for (Index u = 0; u < nu; ++u) {
    udeg[static_cast<std::size_t>(u)] = static_cast<Index>(adj_u[static_cast<std::size_t>(u)].size());
    if (udeg[static_cast<std::size_t>(u)] < min_core) queue_u.push_back(u);
  }
  for (Index i = 0; i < ni; ++i) {
    ideg[static_cast<std::size_t>(i)] = static_cast<Index>(adj_i[static_cast<std::size_t>(i)].size());
    if (ideg[static_cast<std::size_t>(i)] < min_core) queue_i.push_back(i);
  }

  while (!queue_u.empty() || !queue_i.empty()) {
    if (!queue_u.empty()) {
      Index u = queue_u.back();
      queue_u.pop_back();
      if (!ualive[static_cast<std::size_t>(u)]) continue;
      ualive[static_cast<std::size_t>(u)] = 0;
      for (Index i : adj_u[static_cast<std::size_t>(u)]) {
        if (!ialive[static_cast<std::size_t>(i)]) continue;
        if (--ideg[static_cast<std::size_t>(i)] < min_core) queue_i.push_back(i);
      }
    } else {
      Index i = queue_i.back();
      queue_i.pop_back();
      if (!ialive[static_cast<std::size_t>(i)]) continue;
      ialive[static_cast<std::size_t>(i)] = 0;
      for (Index u : adj_i[static_cast<std::size_t>(i)]) {
        if (!ualive[static_cast<std::size_t>(u)]) continue;
        if (--udeg[static_cast<std::size_t>(u)] < min_core) queue_u.push_back(u);
      }
    }
  }

  // Reindex survivors in first-appearance order.
  std::vector<Index> umap(static_cast<std::size_t>(nu), -1), imap(static_cast<std::size_t>(ni), -1);
  std::vector<std::string> fukeys, fikeys;
  for (Index u = 0; u < nu; ++u) {
    if (ualive[static_cast<std::size_t>(u)]) {
      umap[static_cast<std::size_t>(u)] = static_cast<Index>(fukeys.size());
      fukeys.push_back(ukeys[static_cast<std::size_t>(u)]);
    }
  }
  for (Index i = 0; i < ni; ++i) {
    if (ialive[static_cast<std::size_t>(i)]) {
      imap[static_cast<std::size_t>(i)] = static_cast<Index>(fikeys.size());
      fikeys.push_back(ikeys[static_cast<std::size_t>(i)]);
    }
  }
  if (fukeys.empty() || fikeys.empty()) {
    throw Error("corpus eliminated by k-core");
  }

  std::vector<std::vector<Index>> filtered(fukeys.size());
  for (Index u = 0; u < nu; ++u) {
    if (!ualive[static_cast<std::size_t>(u)]) continue;
    auto& dst = filtered[static_cast<std::size_t>(umap[static_cast<std::size_t>(u)])];
    for (Index i : adj_u[static_cast<std::size_t>(u)]) {
      if (ialive[static_cast<std::size_t>(i)]) dst.push_back(imap[static_cast<std::size_t>(i)]);
    }
  }
  return InteractionCorpus::from_parts(std::move(fukeys), std::move(fikeys),
                                       std::move(filtered));
}

}  // namespace prefrank
