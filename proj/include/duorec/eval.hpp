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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "duorec/interactions.hpp"
#include "duorec/model.hpp"
#include "duorec/types.hpp"

namespace duorec {

enum class SplitPart { kTrain, kValidation, kTest };

SplitPart split_part_from_string(const std::string& s);
std::string to_string(SplitPart part);

// Mean metrics over evaluated users (those with at least one truth item).
struct MetricsReport {
  std::vector<int> ks;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
  Index num_evaluated_users = 0;
};

// Top-K item indices by descending score, ties broken by ascending index;
// masked (training) items are excluded entirely.
template <typename Scalar>
std::vector<Index> rank_items(const VectorX<Scalar>& scores,
                              const std::vector<bool>& mask, Index k) {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i)
    if (mask.empty() || !mask[static_cast<std::size_t>(i)]) order.push_back(i);
  const Index keep = std::min<Index>(k, static_cast<Index>(order.size()));
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&scores](Index a, Index b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(static_cast<std::size_t>(keep));
  return order;
}

// truth must be sorted ascending.
double recall_at_k(const std::vector<Index>& topk,
                   const std::vector<Index>& truth, Index k);
double ndcg_at_k(const std::vector<Index>& topk,
                 const std::vector<Index>& truth, Index k);

// Scores every user against every item, masks that user's training items,
// and averages Recall@K / NDCG@K over users with ground truth in `part`.
// When part is kTrain nothing is masked and the training items are the truth.
template <typename Scalar>
MetricsReport evaluate_representations(const MatrixX<Scalar>& z_user,
                                       const MatrixX<Scalar>& z_item,
                                       const SplitDataset& split,
                                       SplitPart part, std::vector<int> ks,
                                       bool mask_validation_at_test = false) {
  std::sort(ks.begin(), ks.end());
  const Index num_users = z_user.rows();
  const Index num_items = z_item.rows();
  const InteractionTable& truth_table =
      part == SplitPart::kTrain
          ? split.train
          : (part == SplitPart::kValidation ? split.validation : split.test);
  UserAdjacency truth_adj(truth_table);
  UserAdjacency train_adj(split.train);
  UserAdjacency valid_adj(split.validation);

  MetricsReport report;
  report.ks = ks;
  std::map<int, KahanSum> recall_sum, ndcg_sum;
  const Index max_k = ks.back();

  for (Index u = 0; u < num_users; ++u) {
    std::vector<Index> truth(truth_adj.begin(u), truth_adj.end(u));
    if (truth.empty()) continue;

    std::vector<bool> mask;
    if (part != SplitPart::kTrain) {
      mask.assign(static_cast<std::size_t>(num_items), false);
      for (const Index* it = train_adj.begin(u); it != train_adj.end(u); ++it)
        mask[static_cast<std::size_t>(*it)] = true;
      if (part == SplitPart::kTest && mask_validation_at_test)
        for (const Index* it = valid_adj.begin(u); it != valid_adj.end(u); ++it)
          mask[static_cast<std::size_t>(*it)] = true;
    }

    VectorX<Scalar> scores = z_item * z_user.row(u).transpose();
    const std::vector<Index> topk = rank_items(scores, mask, max_k);
    for (int k : ks) {
      recall_sum[k].add(recall_at_k(topk, truth, k));
      ndcg_sum[k].add(ndcg_at_k(topk, truth, k));
    }
    report.num_evaluated_users++;
  }

  if (report.num_evaluated_users == 0)
    throw DataError("evaluation: no user has ground truth in the chosen part");
  for (int k : ks) {
    report.recall[k] =
        recall_sum[k].value() / static_cast<double>(report.num_evaluated_users);
    report.ndcg[k] =
        ndcg_sum[k].value() / static_cast<double>(report.num_evaluated_users);
  }
  return report;
}

}  // namespace duorec
