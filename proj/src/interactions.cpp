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
#include "duorec/interactions.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

namespace duorec {

bool InteractionTable::has_pair(Index u, Index i) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(u, i));
}

UserAdjacency::UserAdjacency(const InteractionTable& table)
    : offsets(table.num_users + 1, 0) {
  for (const auto& [u, i] : table.pairs) offsets[u + 1]++;
  for (Index u = 0; u < table.num_users; ++u) offsets[u + 1] += offsets[u];
  items.resize(table.pairs.size());
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [u, i] : table.pairs) items[cursor[u]++] = i;
  // pairs are sorted by (u, i), so each user's slice is already ascending
}

bool UserAdjacency::contains(Index u, Index i) const {
  return std::binary_search(begin(u), end(u), i);
}

std::vector<Index> user_degrees(const InteractionTable& table) {
  std::vector<Index> deg(table.num_users, 0);
  for (const auto& [u, i] : table.pairs) deg[u]++;
  return deg;
}

std::vector<Index> item_degrees(const InteractionTable& table) {
  std::vector<Index> deg(table.num_items, 0);
  for (const auto& [u, i] : table.pairs) deg[i]++;
  return deg;
}

InteractionTable load_interactions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open interaction file: " + path);

  InteractionTable table;
  std::unordered_map<std::string, Index> user_index;
  std::unordered_map<std::string, Index> item_index;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab1 = line.find('\t');
    if (tab1 == std::string::npos || tab1 == 0) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected at least two tab-separated fields");
    }
    auto tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) tab2 = line.size();
    if (tab2 == tab1 + 1) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": empty item id field");
    }
    const std::string user_id = line.substr(0, tab1);
    const std::string item_id = line.substr(tab1 + 1, tab2 - tab1 - 1);

    auto [uit, u_new] = user_index.try_emplace(user_id, table.num_users);
    if (u_new) {
      table.user_ids.push_back(user_id);
      table.num_users++;
    }
    auto [iit, i_new] = item_index.try_emplace(item_id, table.num_items);
    if (i_new) {
      table.item_ids.push_back(item_id);
      table.num_items++;
    }
    table.pairs.emplace_back(uit->second, iit->second);
  }

  std::sort(table.pairs.begin(), table.pairs.end());
  table.pairs.erase(std::unique(table.pairs.begin(), table.pairs.end()),
                    table.pairs.end());
  if (table.pairs.empty()) throw DataError(path + ": empty table");
  return table;
}

void save_interactions(const InteractionTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write interaction file: " + path);
  for (const auto& [u, i] : table.pairs)
    out << table.user_ids[u] << '\t' << table.item_ids[i] << '\n';
  if (!out) throw DataError("write failed: " + path);
}

InteractionTable kcore_filter(const InteractionTable& table, Index k) {
  if (k < 1) throw ConfigError("k-core requires k >= 1");

  std::vector<Index> udeg = user_degrees(table);
  std::vector<Index> ideg = item_degrees(table);
  std::vector<bool> user_alive(table.num_users, true);
  std::vector<bool> item_alive(table.num_items, true);

  bool changed = true;
  while (changed) {
    changed = false;
    for (Index u = 0; u < table.num_users; ++u) {
      if (user_alive[u] && udeg[u] < k) {
        user_alive[u] = false;
        changed = true;
      }
    }
    for (Index i = 0; i < table.num_items; ++i) {
      if (item_alive[i] && ideg[i] < k) {
        item_alive[i] = false;
        changed = true;
      }
    }
    if (!changed) break;
    std::fill(udeg.begin(), udeg.end(), 0);
    std::fill(ideg.begin(), ideg.end(), 0);
    for (const auto& [u, i] : table.pairs) {
      if (user_alive[u] && item_alive[i]) {
        udeg[u]++;
        ideg[i]++;
      }
    }
  }

  InteractionTable out;
  std::vector<Index> user_remap(table.num_users, -1);
  std::vector<Index> item_remap(table.num_items, -1);
  for (Index u = 0; u < table.num_users; ++u) {
    if (user_alive[u] && udeg[u] > 0) {
      user_remap[u] = out.num_users++;
      out.user_ids.push_back(table.user_ids[u]);
    }
  }
  for (Index i = 0; i < table.num_items; ++i) {
    if (item_alive[i] && ideg[i] > 0) {
      item_remap[i] = out.num_items++;
      out.item_ids.push_back(table.item_ids[i]);
    }
  }
  for (const auto& [u, i] : table.pairs) {
    if (user_remap[u] >= 0 && item_remap[i] >= 0)
      out.pairs.emplace_back(user_remap[u], item_remap[i]);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  if (out.pairs.empty()) {
    throw DataError("k-core filter with k=" + std::to_string(k) +
                    " removed every interaction (dataset too sparse)");
  }
  return out;
}

namespace {

// ceil(num/10 * deg) with exact integer arithmetic; num is the x10 share.
Index ceil_share(Index deg, Index num) { return (num * deg + 9) / 10; }

InteractionTable make_view(const InteractionTable& base,
                           std::vector<std::pair<Index, Index>> pairs) {
  InteractionTable view;
  view.num_users = base.num_users;
  view.num_items = base.num_items;
  view.user_ids = base.user_ids;
  view.item_ids = base.item_ids;
  std::sort(pairs.begin(), pairs.end());
  view.pairs = std::move(pairs);
  return view;
}

}  // namespace

SplitDataset split_interactions(const InteractionTable& table,
                                std::uint64_t seed, SplitMode mode,
                                bool strict) {
  std::vector<std::pair<Index, Index>> train, valid, test;
  train.reserve(table.pairs.size());

  if (mode == SplitMode::kGlobal) {
    std::vector<std::pair<Index, Index>> all = table.pairs;
    Rng rng(mix_seed(seed, 0x67'6c'6f'62'61'6cULL));
    shuffle_inplace(all, rng);
    const Index n = static_cast<Index>(all.size());
    const Index n_train = std::min(ceil_share(n, 8), n);
    const Index n_valid = std::min(ceil_share(n, 1), n - n_train);
    train.assign(all.begin(), all.begin() + n_train);
    valid.assign(all.begin() + n_train, all.begin() + n_train + n_valid);
    test.assign(all.begin() + n_train + n_valid, all.end());
  } else {
    UserAdjacency adj(table);
    for (Index u = 0; u < table.num_users; ++u) {
      std::vector<Index> items(adj.begin(u), adj.end(u));
      const Index deg = static_cast<Index>(items.size());
      if (strict && deg < 3) {
        throw DataError("user " + table.user_ids[u] + " has only " +
                        std::to_string(deg) +
                        " interactions; strict split needs >= 3");
      }
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(u)));
      shuffle_inplace(items, rng);
      const Index n_train = std::min(ceil_share(deg, 8), deg);
      const Index n_valid = std::min(ceil_share(deg, 1), deg - n_train);
      for (Index p = 0; p < deg; ++p) {
        if (p < n_train)
          train.emplace_back(u, items[p]);
        else if (p < n_train + n_valid)
          valid.emplace_back(u, items[p]);
        else
          test.emplace_back(u, items[p]);
      }
    }
  }

  SplitDataset split;
  split.seed = seed;
  split.train = make_view(table, std::move(train));
  split.validation = make_view(table, std::move(valid));
  split.test = make_view(table, std::move(test));
  return split;
}

}  // namespace duorec
