// Copyright 2026 The duorec Authors
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
//
// Test-only oracles and fixtures. Everything here recomputes results through
// an independent route (dense matrices, full sorts, single-node peeling) so
// the implementations they check cannot share a bug with them.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "duorec/features.hpp"
#include "duorec/interactions.hpp"
#include "duorec/types.hpp"

namespace duorec::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("duorec_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("test fixture missing: " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---------------------------------------------------------------------------
// fixtures

// Random table where every user and item has at least one pair.
inline InteractionTable random_table(Index num_users, Index num_items,
                                     double density, Rng& rng) {
  InteractionTable table;
  table.num_users = num_users;
  table.num_items = num_items;
  for (Index u = 0; u < num_users; ++u)
    table.user_ids.push_back("u" + std::to_string(u));
  for (Index i = 0; i < num_items; ++i)
    table.item_ids.push_back("i" + std::to_string(i));
  for (Index u = 0; u < num_users; ++u)
    for (Index i = 0; i < num_items; ++i)
      if (uniform01(rng) < density) table.pairs.emplace_back(u, i);
  // patch empty rows/columns so bipartite preconditions hold
  std::vector<bool> item_hit(static_cast<std::size_t>(num_items), false);
  std::vector<bool> user_hit(static_cast<std::size_t>(num_users), false);
  for (const auto& [u, i] : table.pairs) {
    user_hit[static_cast<std::size_t>(u)] = true;
    item_hit[static_cast<std::size_t>(i)] = true;
  }
  for (Index u = 0; u < num_users; ++u)
    if (!user_hit[static_cast<std::size_t>(u)])
      table.pairs.emplace_back(u, static_cast<Index>(uniform_index(rng, num_items)));
  for (Index i = 0; i < num_items; ++i)
    if (!item_hit[static_cast<std::size_t>(i)])
      table.pairs.emplace_back(static_cast<Index>(uniform_index(rng, num_users)), i);
  std::sort(table.pairs.begin(), table.pairs.end());
  table.pairs.erase(std::unique(table.pairs.begin(), table.pairs.end()),
                    table.pairs.end());
  return table;
}

inline FeatureMatrix random_features(Index rows, Index dim,
                                     const std::string& modality, Rng& rng) {
  FeatureMatrix f;
  f.modality = modality;
  f.data.resize(rows, dim);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < dim; ++c)
      f.data(r, c) = static_cast<float>(2.0 * uniform01(rng) - 1.0);
  return f;
}

// Planted two-block dataset: 20 users, 30 items, users of block b interact
// with 10 round-robin items inside block b's 15 items. Every item ends with
// degree in [5, 10], so a 5-core filter keeps everything.
struct PlantedToy {
  InteractionTable table;
  FeatureMatrix visual;
  FeatureMatrix textual;
};

inline PlantedToy planted_toy() {
  PlantedToy toy;
  auto& t = toy.table;
  t.num_users = 20;
  t.num_items = 30;
  for (Index u = 0; u < t.num_users; ++u)
    t.user_ids.push_back("user" + std::to_string(u));
  for (Index i = 0; i < t.num_items; ++i)
    t.item_ids.push_back("item" + std::to_string(i));
  for (Index u = 0; u < t.num_users; ++u) {
    const Index block = u / 10;
    for (Index j = 0; j < 10; ++j) {
      const Index i = 15 * block + ((u % 10) + j) % 15;
      t.pairs.emplace_back(u, i);
    }
  }
  std::sort(t.pairs.begin(), t.pairs.end());

  auto make_features = [&](Index dim, const std::string& modality) {
    FeatureMatrix f;
    f.modality = modality;
    f.data.resize(t.num_items, dim);
    for (Index i = 0; i < t.num_items; ++i) {
      const Index block = i / 15;
      for (Index c = 0; c < dim; ++c) {
        const double base = (c % 2 == static_cast<Index>(block)) ? 2.0 : 0.25;
        f.data(i, c) = static_cast<float>(
            base + 0.02 * std::sin(static_cast<double>(i * (c + 3) + 1)));
      }
    }
    return f;
  };
  toy.visual = make_features(8, "visual");
  toy.textual = make_features(6, "textual");
  return toy;
}

// ---------------------------------------------------------------------------
// oracles

// Dense bipartite propagation: recomputes degrees and the normalized
// adjacency from the raw pairs, multiplies densely and sums layers 0..L.
inline std::pair<MatrixXd, MatrixXd> dense_bipartite_oracle(
    const InteractionTable& train, const MatrixXd& user0, const MatrixXd& item0,
    Index layers) {
  const Index n = train.num_users, m = train.num_items;
  VectorXd udeg = VectorXd::Zero(n), ideg = VectorXd::Zero(m);
  for (const auto& [u, i] : train.pairs) {
    udeg[u] += 1.0;
    ideg[i] += 1.0;
  }
  MatrixXd adj = MatrixXd::Zero(n, m);
  for (const auto& [u, i] : train.pairs)
    adj(u, i) = 1.0 / std::sqrt(udeg[u] * ideg[i]);

  MatrixXd u_cur = user0, i_cur = item0;
  MatrixXd u_sum = user0, i_sum = item0;
  for (Index l = 0; l < layers; ++l) {
    MatrixXd u_next = adj * i_cur;
    MatrixXd i_next = adj.transpose() * u_cur;
    u_cur = u_next;
    i_cur = i_next;
    u_sum += u_cur;
    i_sum += i_cur;
  }
  return {u_sum, i_sum};
}

// Dense homogeneous propagation oracle from explicit neighbor lists.
inline MatrixXd dense_homogeneous_oracle(
    const std::vector<std::vector<std::pair<Index, double>>>& neighbors,
    const MatrixXd& h0, Index layers) {
  const Index n = static_cast<Index>(neighbors.size());
  MatrixXd weights = MatrixXd::Zero(n, n);
  for (Index r = 0; r < n; ++r)
    for (const auto& [c, w] : neighbors[static_cast<std::size_t>(r)])
      weights(r, c) = w;
  MatrixXd h = h0;
  for (Index l = 0; l < layers; ++l) h = weights * h;
  return h;
}

// k-core peeling oracle: deletes one violating node at a time (first user in
// index order, then first item) and re-scans, until no node violates.
// Returns the surviving external ids.
inline std::pair<std::set<std::string>, std::set<std::string>>
kcore_peeling_oracle(const InteractionTable& table, Index k) {
  std::vector<bool> user_alive(static_cast<std::size_t>(table.num_users), true);
  std::vector<bool> item_alive(static_cast<std::size_t>(table.num_items), true);
  while (true) {
    std::vector<Index> udeg(static_cast<std::size_t>(table.num_users), 0);
    std::vector<Index> ideg(static_cast<std::size_t>(table.num_items), 0);
    for (const auto& [u, i] : table.pairs)
      if (user_alive[static_cast<std::size_t>(u)] &&
          item_alive[static_cast<std::size_t>(i)]) {
        udeg[static_cast<std::size_t>(u)]++;
        ideg[static_cast<std::size_t>(i)]++;
      }
    bool removed = false;
    for (Index u = 0; u < table.num_users && !removed; ++u)
      if (user_alive[static_cast<std::size_t>(u)] &&
          udeg[static_cast<std::size_t>(u)] < k) {
        user_alive[static_cast<std::size_t>(u)] = false;
        removed = true;
      }
    for (Index i = 0; i < table.num_items && !removed; ++i)
      if (item_alive[static_cast<std::size_t>(i)] &&
          ideg[static_cast<std::size_t>(i)] < k) {
        item_alive[static_cast<std::size_t>(i)] = false;
        removed = true;
      }
    if (!removed) break;
  }
  std::set<std::string> users, items;
  for (Index u = 0; u < table.num_users; ++u)
    if (user_alive[static_cast<std::size_t>(u)])
      users.insert(table.user_ids[static_cast<std::size_t>(u)]);
  for (Index i = 0; i < table.num_items; ++i)
    if (item_alive[static_cast<std::size_t>(i)])
      items.insert(table.item_ids[static_cast<std::size_t>(i)]);
  return {users, items};
}

// Full-sort top-k oracle: (value desc, index asc), truncated at k.
template <typename Value>
std::vector<Index> full_sort_topk_oracle(
    const std::vector<std::pair<Index, Value>>& candidates, Index k) {
  auto sorted = candidates;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<Index> ids;
  for (Index j = 0; j < std::min<Index>(k, static_cast<Index>(sorted.size())); ++j)
    ids.push_back(sorted[static_cast<std::size_t>(j)].first);
  return ids;
}

// Metric oracles over an explicit ranking: scan positions with an indicator
// for DCG and score the explicitly constructed ideal ranking for IDCG.
inline double recall_oracle(const std::vector<Index>& ranking,
                            const std::set<Index>& truth, Index k) {
  Index hits = 0;
  for (Index p = 0; p < std::min<Index>(k, static_cast<Index>(ranking.size())); ++p)
    hits += truth.count(ranking[static_cast<std::size_t>(p)]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline double dcg_oracle(const std::vector<Index>& ranking,
                         const std::set<Index>& truth, Index k) {
  double dcg = 0.0;
  for (Index p = 0; p < std::min<Index>(k, static_cast<Index>(ranking.size())); ++p)
    if (truth.count(ranking[static_cast<std::size_t>(p)]))
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg;
}

inline double ndcg_oracle(const std::vector<Index>& ranking,
                          const std::set<Index>& truth, Index k) {
  std::vector<Index> ideal(truth.begin(), truth.end());
  for (Index i = 0; i < static_cast<Index>(ranking.size()) * 2; ++i)
    if (!truth.count(i)) ideal.push_back(i);  // any non-hits after the hits
  return dcg_oracle(ranking, truth, k) / dcg_oracle(ideal, truth, k);
}

}  // namespace duorec::testing
