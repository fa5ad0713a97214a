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

#include <string>
#include <vector>

#include "duorec/features.hpp"
#include "duorec/interactions.hpp"
#include "duorec/types.hpp"

namespace duorec {

// One weighted edge of a sparse graph.
struct GraphEdge {
  Index row;
  Index col;
  double weight;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

// Symmetric-normalized user-item adjacency built from training edges:
// weight(u, i) = 1 / sqrt(deg(u) * deg(i)). One structure is shared by all
// modalities; only node features differ.
struct BipartiteGraph {
  Index num_users = 0;
  Index num_items = 0;
  std::vector<GraphEdge> edges;  // sorted by (user, item)
  std::vector<Index> user_degrees;
  std::vector<Index> item_degrees;
};

// Top-k user co-occurrence graph. Each retained neighbor carries the softmax
// weight of its raw co-interaction count; rows sum to 1 when nonempty.
struct UserCooccurrenceGraph {
  Index num_users = 0;
  Index k = 0;
  std::vector<std::vector<std::pair<Index, double>>> neighbors;
};

// Binarized per-modality item kNN graph: the k most cosine-similar other
// items of each item, edge value 1.
struct ItemKnnGraph {
  Index num_items = 0;
  Index k = 0;
  std::string modality;
  std::vector<std::vector<Index>> neighbors;  // ascending item index
};

// Weighted union of the per-modality kNN graphs:
// weight(i, i') = sum_m alpha_m * [i' in knn_m(i)], zero-weight edges dropped.
struct ItemSemanticGraph {
  Index num_items = 0;
  std::vector<double> modality_weights;
  std::vector<std::vector<std::pair<Index, double>>> neighbors;
};

BipartiteGraph build_normalized_bipartite(const InteractionTable& train);

UserCooccurrenceGraph build_user_cooccurrence(const InteractionTable& train,
                                              Index k);

ItemKnnGraph build_item_semantic_modality(const FeatureMatrix& features,
                                          Index k);

ItemSemanticGraph combine_item_graphs(const std::vector<ItemKnnGraph>& graphs,
                                      const std::vector<double>& modality_weights);

// Treats a single modality's kNN graph as the semantic graph with weight 1.
ItemSemanticGraph item_graph_from_single(const ItemKnnGraph& graph);

// Graph cache files: header "GRAPH <kind> <rows> <cols> <nnz>", then nnz
// lines "row col weight" in row-major order. Weights are printed with 17
// significant digits so reload is bit-exact.
struct GraphFile {
  std::string kind;
  Index rows = 0;
  Index cols = 0;
  std::vector<GraphEdge> edges;
};

void write_graph_file(const GraphFile& file, const std::string& path);
GraphFile read_graph_file(const std::string& path);

void save_bipartite_graph(const BipartiteGraph& g, const std::string& path);
BipartiteGraph load_bipartite_graph(const std::string& path);
void save_user_graph(const UserCooccurrenceGraph& g, const std::string& path);
UserCooccurrenceGraph load_user_graph(const std::string& path);
void save_item_graph(const ItemSemanticGraph& g, const std::string& path);
ItemSemanticGraph load_item_graph(const std::string& path);
void save_item_knn_graph(const ItemKnnGraph& g, const std::string& path);
ItemKnnGraph load_item_knn_graph(const std::string& path);

}  // namespace duorec
