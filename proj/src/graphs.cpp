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
#include "duorec/graphs.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace duorec {

namespace {

// Deterministic parallel loop: rows are split into contiguous chunks and each
// worker writes only its own rows.
void parallel_rows(Index n, const std::function<void(Index, Index)>& body) {
  const unsigned hw = std::thread::hardware_concurrency();
  const Index min_chunk = 256;
  if (hw <= 1 || n < 2 * min_chunk) {
    body(0, n);
    return;
  }
  const Index num_chunks = std::min<Index>(hw, (n + min_chunk - 1) / min_chunk);
  const Index chunk = (n + num_chunks - 1) / num_chunks;
  std::vector<std::thread> workers;
  for (Index begin = 0; begin < n; begin += chunk) {
    const Index end = std::min(begin + chunk, n);
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& w : workers) w.join();
}

// Keeps the k largest values; ties broken by ascending index. Equivalent to a
// full sort by (value desc, index asc) truncated at k.
template <typename Value>
std::vector<std::pair<Index, Value>> top_k(
    std::vector<std::pair<Index, Value>> candidates, Index k) {
  auto better = [](const std::pair<Index, Value>& a,
                   const std::pair<Index, Value>& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k),
                                          candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + keep,
                    candidates.end(), better);
  candidates.resize(keep);
  return candidates;
}

}  // namespace

BipartiteGraph build_normalized_bipartite(const InteractionTable& train) {
  if (train.pairs.empty()) throw DataError("bipartite graph: no training edges");

  BipartiteGraph g;
  g.num_users = train.num_users;
  g.num_items = train.num_items;
  g.user_degrees = user_degrees(train);
  g.item_degrees = item_degrees(train);

  for (Index u = 0; u < g.num_users; ++u) {
    if (g.user_degrees[u] == 0) {
      throw DataError("bipartite graph: user " + std::to_string(u) +
                      " has no training interactions");
    }
  }
  // items may be training-isolated; they simply get no edges

  g.edges.reserve(train.pairs.size());
  for (const auto& [u, i] : train.pairs) {
    const double coeff =
        1.0 / std::sqrt(static_cast<double>(g.user_degrees[u]) *
                        static_cast<double>(g.item_degrees[i]));
    g.edges.push_back({u, i, coeff});
  }
  return g;
}

UserCooccurrenceGraph build_user_cooccurrence(const InteractionTable& train,
                                              Index k) {
  if (k < 1) throw ConfigError("user co-occurrence graph requires k >= 1");

  UserCooccurrenceGraph g;
  g.num_users = train.num_users;
  g.k = k;
  g.neighbors.resize(static_cast<std::size_t>(g.num_users));

  UserAdjacency user_adj(train);
  // item -> users adjacency for counting shared items
  std::vector<std::vector<Index>> item_users(
      static_cast<std::size_t>(train.num_items));
  for (const auto& [u, i] : train.pairs) item_users[i].push_back(u);

  parallel_rows(g.num_users, [&](Index begin, Index end) {
    std::vector<Index> count(static_cast<std::size_t>(g.num_users), 0);
    std::vector<Index> touched;
    for (Index u = begin; u < end; ++u) {
      touched.clear();
      for (const Index* it = user_adj.begin(u); it != user_adj.end(u); ++it) {
        for (Index peer : item_users[*it]) {
          if (peer == u) continue;
          if (count[peer]++ == 0) touched.push_back(peer);
        }
      }
      std::vector<std::pair<Index, Index>> candidates;
      candidates.reserve(touched.size());
      for (Index peer : touched) {
        candidates.emplace_back(peer, count[peer]);
        count[peer] = 0;
      }
      std::sort(candidates.begin(), candidates.end());
      auto retained = top_k(std::move(candidates), k);

      if (!retained.empty()) {
        // softmax over raw counts, max-subtracted; counts can be large
        double max_count = 0;
        for (const auto& [peer, c] : retained)
          max_count = std::max(max_count, static_cast<double>(c));
        double denom = 0.0;
        std::vector<double> expw(retained.size());
        for (std::size_t j = 0; j < retained.size(); ++j) {
          expw[j] = std::exp(static_cast<double>(retained[j].second) - max_count);
          denom += expw[j];
        }
        auto& row = g.neighbors[static_cast<std::size_t>(u)];
        row.reserve(retained.size());
        for (std::size_t j = 0; j < retained.size(); ++j)
          row.emplace_back(retained[j].first, expw[j] / denom);
        std::sort(row.begin(), row.end());
      }
    }
  });
  return g;
}

ItemKnnGraph build_item_semantic_modality(const FeatureMatrix& features,
                                          Index k) {
  if (k < 1) throw ConfigError("item semantic graph requires k >= 1");

  const Index m = features.rows();
  ItemKnnGraph g;
  g.num_items = m;
  g.k = k;
  g.modality = features.modality;
  g.neighbors.resize(static_cast<std::size_t>(m));

  // Rows are L2-normalized up front so similarity blocks are plain products.
  // Zero-norm rows are left as zero vectors: similarity 0 against everything.
  MatrixXd unit = features.data.cast<double>();
  for (Index r = 0; r < m; ++r) {
    const double norm = unit.row(r).norm();
    if (norm > 0.0) unit.row(r) /= norm;
  }

  constexpr Index kBlock = 512;
  parallel_rows(m, [&](Index begin, Index end) {
    for (Index b0 = begin; b0 < end; b0 += kBlock) {
      const Index bn = std::min(kBlock, end - b0);
      MatrixXd sim = unit.middleRows(b0, bn) * unit.transpose();
      for (Index r = 0; r < bn; ++r) {
        const Index i = b0 + r;
        std::vector<std::pair<Index, double>> candidates;
        candidates.reserve(static_cast<std::size_t>(m - 1));
        for (Index j = 0; j < m; ++j) {
          if (j == i) continue;
          candidates.emplace_back(j, sim(r, j));
        }
        auto retained = top_k(std::move(candidates), k);
        auto& row = g.neighbors[static_cast<std::size_t>(i)];
        row.reserve(retained.size());
        for (const auto& [j, s] : retained) row.push_back(j);
        std::sort(row.begin(), row.end());
      }
    }
  });
  return g;
}

ItemSemanticGraph combine_item_graphs(
    const std::vector<ItemKnnGraph>& graphs,
    const std::vector<double>& modality_weights) {
  if (graphs.empty()) throw ConfigError("combine_item_graphs: no input graphs");
  if (graphs.size() != modality_weights.size())
    throw ConfigError("combine_item_graphs: one weight per modality required");
  double total = 0.0;
  for (double w : modality_weights) {
    if (w < 0.0) throw ConfigError("modality weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw ConfigError("modality weights must sum to 1 (got " +
                      std::to_string(total) + ")");

  const Index m = graphs.front().num_items;
  for (const auto& g : graphs) {
    if (g.num_items != m)
      throw DataError("combine_item_graphs: item count mismatch");
  }

  ItemSemanticGraph out;
  out.num_items = m;
  out.modality_weights = modality_weights;
  out.neighbors.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    std::vector<std::pair<Index, double>> row;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      for (Index j : graphs[gi].neighbors[static_cast<std::size_t>(i)])
        row.emplace_back(j, modality_weights[gi]);
    }
    std::sort(row.begin(), row.end());
    auto& merged = out.neighbors[static_cast<std::size_t>(i)];
    for (const auto& [j, w] : row) {
      if (!merged.empty() && merged.back().first == j)
        merged.back().second += w;
      else
        merged.emplace_back(j, w);
    }
    std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
  }
  return out;
}

ItemSemanticGraph item_graph_from_single(const ItemKnnGraph& graph) {
  ItemSemanticGraph out;
  out.num_items = graph.num_items;
  out.modality_weights = {1.0};
  out.neighbors.resize(static_cast<std::size_t>(graph.num_items));
  for (Index i = 0; i < graph.num_items; ++i) {
    for (Index j : graph.neighbors[static_cast<std::size_t>(i)])
      out.neighbors[static_cast<std::size_t>(i)].emplace_back(j, 1.0);
  }
  return out;
}

void write_graph_file(const GraphFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write graph file: " + path);
  out << "GRAPH " << file.kind << ' ' << file.rows << ' ' << file.cols << ' '
      << file.edges.size() << '\n';
  char buf[64];
  for (const auto& e : file.edges) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
    out << e.row << ' ' << e.col << ' ' << buf << '\n';
  }
  if (!out) throw DataError("graph file write failed: " + path);
}

GraphFile read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw DataError(path + ": empty graph file");
  std::istringstream hs(header);
  std::string tag;
  GraphFile file;
  std::size_t nnz = 0;
  if (!(hs >> tag >> file.kind >> file.rows >> file.cols >> nnz) ||
      tag != "GRAPH")
    throw DataError(path + ": malformed graph header");
  file.edges.resize(nnz);
  for (std::size_t n = 0; n < nnz; ++n) {
    auto& e = file.edges[n];
    if (!(in >> e.row >> e.col >> e.weight))
      throw DataError(path + ": truncated at edge " + std::to_string(n));
    if (e.row < 0 || e.row >= file.rows || e.col < 0 || e.col >= file.cols)
      throw DataError(path + ": edge index out of range");
  }
  return file;
}

namespace {

GraphFile expect_kind(const std::string& path, const std::string& kind) {
  GraphFile file = read_graph_file(path);
  if (file.kind != kind)
    throw DataError(path + ": expected kind '" + kind + "', found '" +
                    file.kind + "'");
  return file;
}

}  // namespace

void save_bipartite_graph(const BipartiteGraph& g, const std::string& path) {
  write_graph_file({"bipartite", g.num_users, g.num_items, g.edges}, path);
}

BipartiteGraph load_bipartite_graph(const std::string& path) {
  GraphFile file = expect_kind(path, "bipartite");
  BipartiteGraph g;
  g.num_users = file.rows;
  g.num_items = file.cols;
  g.edges = std::move(file.edges);
  g.user_degrees.assign(static_cast<std::size_t>(g.num_users), 0);
  g.item_degrees.assign(static_cast<std::size_t>(g.num_items), 0);
  for (const auto& e : g.edges) {
    g.user_degrees[static_cast<std::size_t>(e.row)]++;
    g.item_degrees[static_cast<std::size_t>(e.col)]++;
  }
  return g;
}

namespace {

std::vector<GraphEdge> rows_to_edges(
    const std::vector<std::vector<std::pair<Index, double>>>& neighbors) {
  std::vector<GraphEdge> edges;
  for (Index r = 0; r < static_cast<Index>(neighbors.size()); ++r)
    for (const auto& [c, w] : neighbors[static_cast<std::size_t>(r)])
      edges.push_back({r, c, w});
  return edges;
}

std::vector<std::vector<std::pair<Index, double>>> edges_to_rows(
    const GraphFile& file) {
  std::vector<std::vector<std::pair<Index, double>>> rows(
      static_cast<std::size_t>(file.rows));
  for (const auto& e : file.edges)
    rows[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.weight);
  return rows;
}

}  // namespace

void save_user_graph(const UserCooccurrenceGraph& g, const std::string& path) {
  write_graph_file(
      {"user_cooc", g.num_users, g.num_users, rows_to_edges(g.neighbors)},
      path);
}

UserCooccurrenceGraph load_user_graph(const std::string& path) {
  GraphFile file = expect_kind(path, "user_cooc");
  UserCooccurrenceGraph g;
  g.num_users = file.rows;
  g.neighbors = edges_to_rows(file);
  g.k = 0;
  for (const auto& row : g.neighbors)
    g.k = std::max<Index>(g.k, static_cast<Index>(row.size()));
  return g;
}

void save_item_graph(const ItemSemanticGraph& g, const std::string& path) {
  write_graph_file(
      {"item_semantic", g.num_items, g.num_items, rows_to_edges(g.neighbors)},
      path);
}

ItemSemanticGraph load_item_graph(const std::string& path) {
  GraphFile file = expect_kind(path, "item_semantic");
  ItemSemanticGraph g;
  g.num_items = file.rows;
  g.neighbors = edges_to_rows(file);
  return g;
}

void save_item_knn_graph(const ItemKnnGraph& g, const std::string& path) {
  std::vector<GraphEdge> edges;
  for (Index r = 0; r < g.num_items; ++r)
    for (Index c : g.neighbors[static_cast<std::size_t>(r)])
      edges.push_back({r, c, 1.0});
  write_graph_file({"item_knn", g.num_items, g.num_items, std::move(edges)},
                   path);
}

ItemKnnGraph load_item_knn_graph(const std::string& path) {
  GraphFile file = expect_kind(path, "item_knn");
  ItemKnnGraph g;
  g.num_items = file.rows;
  g.neighbors.resize(static_cast<std::size_t>(g.num_items));
  for (const auto& e : file.edges)
    g.neighbors[static_cast<std::size_t>(e.row)].push_back(e.col);
  for (const auto& row : g.neighbors)
    g.k = std::max<Index>(g.k, static_cast<Index>(row.size()));
  return g;
}

}  // namespace duorec
