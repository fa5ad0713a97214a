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
#include "duorec/eval.hpp"

namespace duorec {

SplitPart split_part_from_string(const std::string& s) {
  if (s == "train") return SplitPart::kTrain;
  if (s == "valid" || s == "validation") return SplitPart::kValidation;
  if (s == "test") return SplitPart::kTest;
  throw ConfigError("unknown split part: " + s);
}

std::string to_string(SplitPart part) {
  switch (part) {
    case SplitPart::kTrain: return "train";
    case SplitPart::kValidation: return "valid";
    case SplitPart::kTest: return "test";
  }
  return "?";
}

double recall_at_k(const std::vector<Index>& topk,
                   const std::vector<Index>& truth, Index k) {
  if (truth.empty()) throw DataError("recall_at_k: empty truth set");
  const Index depth = std::min<Index>(k, static_cast<Index>(topk.size()));
  Index hits = 0;
  for (Index p = 0; p < depth; ++p)
    if (std::binary_search(truth.begin(), truth.end(), topk[p])) hits++;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double ndcg_at_k(const std::vector<Index>& topk,
                 const std::vector<Index>& truth, Index k) {
  if (truth.empty()) throw DataError("ndcg_at_k: empty truth set");
  const Index depth = std::min<Index>(k, static_cast<Index>(topk.size()));
  double dcg = 0.0;
  for (Index p = 0; p < depth; ++p) {
    if (std::binary_search(truth.begin(), truth.end(), topk[p]))
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  const Index ideal = std::min<Index>(k, static_cast<Index>(truth.size()));
  double idcg = 0.0;
  for (Index p = 0; p < ideal; ++p)
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

}  // namespace duorec
