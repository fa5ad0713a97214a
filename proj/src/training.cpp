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
#include "duorec/training.hpp"

#include <chrono>
#include <numeric>

namespace duorec {

Index sample_negative(const UserAdjacency& train_adj, Index num_items, Index u,
                      Rng& rng, Index max_attempts) {
  for (Index attempt = 0; attempt < max_attempts; ++attempt) {
    const Index j = static_cast<Index>(
        uniform_index(rng, static_cast<std::uint64_t>(num_items)));
    if (!train_adj.contains(u, j)) return j;
  }
  throw DataError("negative sampling failed for user " + std::to_string(u) +
                  " (user interacts with nearly every item)");
}

std::vector<Triplet> sample_triplets(const InteractionTable& train,
                                     Index batch_size, Rng& rng,
                                     Index max_attempts) {
  if (train.pairs.empty()) throw DataError("sample_triplets: no training edges");
  UserAdjacency adj(train);
  std::vector<Triplet> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  for (Index n = 0; n < batch_size; ++n) {
    const auto& [u, i] = train.pairs[static_cast<std::size_t>(
        uniform_index(rng, train.pairs.size()))];
    batch.push_back({u, i, sample_negative(adj, train.num_items, u, rng,
                                           max_attempts)});
  }
  return batch;
}

TrainResult train(const ModelConfig& model_config,
                  const TrainConfig& train_config, const SplitDataset& split,
                  const GraphOperators<float>& ops,
                  const std::vector<MatrixXf>& features) {
  using Clock = std::chrono::steady_clock;
  const InteractionTable& tr = split.train;
  UserAdjacency train_adj(tr);
  for (Index u = 0; u < tr.num_users; ++u) {
    if (train_adj.degree(u) == 0)
      throw DataError("train: user " + std::to_string(u) +
                      " has no training interactions");
    if (train_adj.degree(u) >= tr.num_items)
      throw DataError("train: user " + std::to_string(u) +
                      " interacts with every item; no negative exists");
  }

  std::vector<Index> feature_dims;
  for (const auto& f : features) feature_dims.push_back(f.cols());
  ModelParams<float> params = init_params<float>(model_config, feature_dims,
                                                 tr.num_users,
                                                 train_config.seed);
  AdamState<float> adam = make_adam_state(params);
  Rng sample_rng(mix_seed(train_config.seed, 0x73616d70ULL));

  TrainResult result;
  result.best_params = params;
  result.best_val_recall20 = -1.0;

  const Index num_pairs = tr.num_pairs();
  const Index batches_per_epoch =
      (num_pairs + train_config.batch_size - 1) / train_config.batch_size;
  std::vector<std::size_t> order(static_cast<std::size_t>(num_pairs));
  std::iota(order.begin(), order.end(), 0);

  Index epochs_since_improvement = 0;
  for (Index epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    shuffle_inplace(order, sample_rng);

    KahanSum epoch_loss;
    ForwardState<float> state;
    try {
      for (Index b = 0; b < batches_per_epoch; ++b) {
        const Index begin = b * train_config.batch_size;
        const Index end = std::min(begin + train_config.batch_size, num_pairs);
        std::vector<Triplet> batch;
        batch.reserve(static_cast<std::size_t>(end - begin));
        for (Index p = begin; p < end; ++p) {
          const auto& [u, i] = tr.pairs[order[static_cast<std::size_t>(p)]];
          batch.push_back(
              {u, i, sample_negative(train_adj, tr.num_items, u, sample_rng)});
        }
        ForwardState<float> state = forward(params, features, ops, model_config);
        epoch_loss.add(bpr_loss(state, batch, train_config.reg_lambda, params,
                                train_config.reg_full) *
                       static_cast<double>(batch.size()));
        Gradients<float> grads =
            backward(params, features, ops, model_config, state, batch,
                     train_config.reg_lambda, train_config.reg_full);
        adam_step(params, grads, adam,
                  static_cast<float>(train_config.learning_rate));
      }
      state = forward(params, features, ops, model_config);
    } catch (const DivergenceError&) {
      result.diverged = true;
      if (result.best_val_recall20 < 0.0) result.best_val_recall20 = 0.0;
      break;
    }

    MetricsReport val = evaluate_representations(
        state.z_user, state.z_item, split, SplitPart::kValidation, {20});
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - epoch_start)
            .count();

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss.value() / static_cast<double>(num_pairs);
    stats.val_recall20 = val.recall.at(20);
    stats.val_ndcg20 = val.ndcg.at(20);
    stats.alpha = static_cast<double>(params.alpha());
    stats.elapsed_ms = elapsed_ms;
    result.history.push_back(stats);

    if (stats.val_recall20 > result.best_val_recall20) {
      result.best_val_recall20 = stats.val_recall20;
      result.best_params = params;
      result.best_epoch = epoch;
      epochs_since_improvement = 0;
    } else if (++epochs_since_improvement >= train_config.patience) {
      break;
    }
  }

  if (result.best_val_recall20 < 0.0) result.best_val_recall20 = 0.0;
  return result;
}

}  // namespace duorec
