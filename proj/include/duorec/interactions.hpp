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
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "duorec/types.hpp"

namespace duorec {

// Deduplicated implicit-feedback pairs over dense user/item indices.
// user_ids/item_ids map dense index -> external string id; pairs are kept
// sorted by (user, item).
struct InteractionTable {
  Index num_users = 0;
  Index num_items = 0;
  std::vector<std::pair<Index, Index>> pairs;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  Index num_pairs() const { return static_cast<Index>(pairs.size()); }
  bool has_pair(Index u, Index i) const;
};

// CSR-style per-user adjacency over a table's pairs; item lists are sorted.
struct UserAdjacency {
  std::vector<Index> offsets;  // size num_users + 1
  std::vector<Index> items;

  explicit UserAdjacency(const InteractionTable& table);
  Index degree(Index u) const { return offsets[u + 1] - offsets[u]; }
  const Index* begin(Index u) const { return items.data() + offsets[u]; }
  const Index* end(Index u) const { return items.data() + offsets[u + 1]; }
  bool contains(Index u, Index i) const;
};

std::vector<Index> user_degrees(const InteractionTable& table);
std::vector<Index> item_degrees(const InteractionTable& table);

enum class SplitMode { kPerUser, kGlobal };

struct SplitDataset {
  InteractionTable train;
  InteractionTable validation;
  InteractionTable test;
  std::uint64_t seed = 0;
};

// Reads "external_user TAB external_item [TAB ignored...]" lines. '#' lines
// are skipped. Duplicates collapse to one pair; dense ids follow first
// occurrence order.
InteractionTable load_interactions(const std::string& path);

// Writes pairs as external-id lines in (user, item) dense-index order.
void save_interactions(const InteractionTable& table, const std::string& path);

// Iteratively removes users/items with degree < k until fixed point, then
// reindexes survivors densely (ascending old index). Throws DataError when
// nothing survives.
InteractionTable kcore_filter(const InteractionTable& table, Index k);

// Per-user stratified 8:1:1 split with ceiling cuts: each user's items are
// shuffled with a seed derived from (seed, user) and cut at ceil(0.8*deg) /
// next ceil(0.1*deg) / remainder. kGlobal shuffles the whole pair set instead
// (comparison mode; users may then lack training pairs).
// `strict` rejects users with fewer than 3 interactions.
SplitDataset split_interactions(const InteractionTable& table,
                                std::uint64_t seed,
                                SplitMode mode = SplitMode::kPerUser,
                                bool strict = false);

}  // namespace duorec
