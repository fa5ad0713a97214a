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

#include <cmath>
#include <cstdint>
#include <vector>

#include "duorec/eval.hpp"
#include "duorec/interactions.hpp"
#include "duorec/model.hpp"
#include "duorec/types.hpp"

namespace duorec {

// One BPR training example: (u, pos) is a training edge, (u, neg) is not.
struct Triplet {
  Index user;
  Index pos;
  Index neg;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double reg_lambda = 1e-4;
  Index batch_size = 2048;
  Index max_epochs = 1000;
  Index patience = 20;
  std::uint64_t seed = 42;
  bool reg_full = false;  // regularize every parameter instead of batch rows
};

// Uniform rejection sampling of an item the user has not interacted with.
Index sample_negative(const UserAdjacency& train_adj, Index num_items, Index u,
                      Rng& rng, Index max_attempts = 1000);

// batch_size triplets with positives uniform over training edges.
std::vector<Triplet> sample_triplets(const InteractionTable& train,
                                     Index batch_size, Rng& rng,
                                     Index max_attempts = 1000);

template <typename Scalar>
struct Gradients {
  std::vector<MatrixX<Scalar>> user_embed;
  std::vector<MatrixX<Scalar>> proj_weight;
  std::vector<VectorX<Scalar>> proj_bias;
  Scalar fusion_logit = Scalar(0);
};

template <typename Scalar>
Gradients<Scalar> zero_gradients(const ModelParams<Scalar>& params) {
  Gradients<Scalar> g;
  for (const auto& m : params.user_embed)
    g.user_embed.push_back(MatrixX<Scalar>::Zero(m.rows(), m.cols()));
  for (const auto& m : params.proj_weight)
    g.proj_weight.push_back(MatrixX<Scalar>::Zero(m.rows(), m.cols()));
  for (const auto& v : params.proj_bias)
    g.proj_bias.push_back(VectorX<Scalar>::Zero(v.size()));
  return g;
}

namespace detail {

// Squared-norm regularizer of Eq-10 style: by default the batch-touched user
// embedding rows, the pos/neg items' projected layer-0 rows, and the
// projection tensors, averaged by batch size. reg_full switches to the plain
// squared norm of every parameter (still batch-averaged).
template <typename Scalar>
double reg_term(const ModelParams<Scalar>& params,
                const ForwardState<Scalar>& state,
                const std::vector<Triplet>& batch, bool reg_full) {
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double sum = 0.0;
  if (reg_full) {
    for (const auto& m : params.user_embed) sum += m.squaredNorm();
    for (const auto& m : params.proj_weight) sum += m.squaredNorm();
    for (const auto& v : params.proj_bias) sum += v.squaredNorm();
    sum += static_cast<double>(params.fusion_logit) *
           static_cast<double>(params.fusion_logit);
  } else {
    for (const auto& t : batch) {
      for (std::size_t m = 0; m < params.user_embed.size(); ++m) {
        sum += params.user_embed[m].row(t.user).squaredNorm();
        sum += state.item_layer0[m].row(t.pos).squaredNorm();
        sum += state.item_layer0[m].row(t.neg).squaredNorm();
      }
    }
    for (const auto& m : params.proj_weight) sum += m.squaredNorm();
    for (const auto& v : params.proj_bias) sum += v.squaredNorm();
  }
  return sum * inv_batch;
}

}  // namespace detail

// Mean of -ln sigmoid(y_ui - y_uj) over the batch plus the regularizer.
template <typename Scalar>
double bpr_loss(const ForwardState<Scalar>& state,
                const std::vector<Triplet>& batch, double lambda,
                const ModelParams<Scalar>& params, bool reg_full = false) {
  if (batch.empty()) throw DataError("bpr_loss: empty batch");
  KahanSum rec;
  for (const auto& t : batch) {
    const Scalar delta = state.z_user.row(t.user).dot(
        state.z_item.row(t.pos) - state.z_item.row(t.neg));
    rec.add(static_cast<double>(softplus(-delta)));
  }
  const double loss = rec.value() / static_cast<double>(batch.size()) +
                      lambda * detail::reg_term(params, state, batch, reg_full);
  if (!std::isfinite(loss)) throw DivergenceError("non-finite training loss");
  return loss;
}

// Exact reverse accumulation through integration, the homogeneous
// propagations (frozen weights, gradients flow through node features only),
// fusion, bipartite propagation, and the feature projections.
template <typename Scalar>
Gradients<Scalar> backward(const ModelParams<Scalar>& params,
                           const std::vector<MatrixX<Scalar>>& features,
                           const GraphOperators<Scalar>& ops,
                           const ModelConfig& config,
                           const ForwardState<Scalar>& state,
                           const std::vector<Triplet>& batch, double lambda,
                           bool reg_full = false) {
  if (batch.empty()) throw DataError("backward: empty batch");
  const Index width = state.z_user.cols();
  const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(batch.size());

  // d loss / d z
  MatrixX<Scalar> d_z_user = MatrixX<Scalar>::Zero(state.z_user.rows(), width);
  MatrixX<Scalar> d_z_item = MatrixX<Scalar>::Zero(state.z_item.rows(), width);
  for (const auto& t : batch) {
    const auto z_u = state.z_user.row(t.user);
    const auto z_i = state.z_item.row(t.pos);
    const auto z_j = state.z_item.row(t.neg);
    const Scalar delta = z_u.dot(z_i - z_j);
    const Scalar coeff = -sigmoid(-delta) * inv_batch;
    d_z_user.row(t.user) += coeff * (z_i - z_j);
    d_z_item.row(t.pos) += coeff * z_u;
    d_z_item.row(t.neg) -= coeff * z_u;
  }

  // integration + homogeneous propagation (adjoint uses transposed weights)
  MatrixX<Scalar> d_fused_user = d_z_user;
  if (config.components != ComponentMode::kUiOnly) {
    MatrixX<Scalar> g = d_z_user;
    for (Index l = 0; l < config.layers_user; ++l) g = ops.user_user_t * g;
    d_fused_user += g;
  }
  MatrixX<Scalar> d_fused_item = d_z_item;
  if (config.components == ComponentMode::kFull) {
    MatrixX<Scalar> g = d_z_item;
    for (Index l = 0; l < config.layers_item; ++l) g = ops.item_item_t * g;
    d_fused_item += g;
  }

  // fusion
  const std::size_t num_modalities = config.modalities.size();
  const Scalar alpha = params.alpha();
  const Scalar beta = Scalar(1) - alpha;
  std::vector<MatrixX<Scalar>> d_modal_user(num_modalities);
  std::vector<MatrixX<Scalar>> d_modal_item(num_modalities);
  Scalar d_alpha = Scalar(0);
  if (num_modalities == 1) {
    d_modal_user[0] = std::move(d_fused_user);
    d_modal_item[0] = std::move(d_fused_item);
  } else {
    const auto& u_v = state.modal_user[0];
    const auto& u_t = state.modal_user[1];
    const auto& i_v = state.modal_item[0];
    const auto& i_t = state.modal_item[1];
    const Index d = config.dim;
    switch (config.fusion) {
      case FusionMode::kAttentiveConcat: {
        auto d_left = d_fused_user.leftCols(d);
        auto d_right = d_fused_user.rightCols(d);
        d_modal_user[0] = alpha * d_left;
        d_modal_user[1] = beta * d_right;
        d_alpha = d_left.cwiseProduct(u_v).sum() - d_right.cwiseProduct(u_t).sum();
        d_modal_item[0] = d_fused_item.leftCols(d);
        d_modal_item[1] = d_fused_item.rightCols(d);
        break;
      }
      case FusionMode::kWeightedSum:
        d_modal_user[0] = alpha * d_fused_user;
        d_modal_user[1] = beta * d_fused_user;
        d_alpha = d_fused_user.cwiseProduct(u_v - u_t).sum();
        d_modal_item[0] = d_fused_item;
        d_modal_item[1] = d_fused_item;
        break;
      case FusionMode::kMean:
        d_modal_user[0] = d_fused_user / Scalar(2);
        d_modal_user[1] = d_fused_user / Scalar(2);
        d_modal_item[0] = d_fused_item / Scalar(2);
        d_modal_item[1] = d_fused_item / Scalar(2);
        break;
      case FusionMode::kWeightedMax: {
        // subgradient: the visual branch wins exact ties, matching cwiseMax
        MatrixX<Scalar> user_take_v =
            ((alpha * u_v).array() >= (beta * u_t).array())
                .template cast<Scalar>()
                .matrix();
        d_modal_user[0] =
            alpha * d_fused_user.cwiseProduct(user_take_v);
        d_modal_user[1] =
            beta * d_fused_user.cwiseProduct(MatrixX<Scalar>::Ones(
                                                 user_take_v.rows(),
                                                 user_take_v.cols()) -
                                             user_take_v);
        d_alpha = d_fused_user.cwiseProduct(user_take_v.cwiseProduct(u_v))
                      .sum() -
                  d_fused_user
                      .cwiseProduct((MatrixX<Scalar>::Ones(user_take_v.rows(),
                                                           user_take_v.cols()) -
                                     user_take_v)
                                        .cwiseProduct(u_t))
                      .sum();
        MatrixX<Scalar> item_take_v =
            (i_v.array() >= i_t.array()).template cast<Scalar>().matrix();
        d_modal_item[0] = d_fused_item.cwiseProduct(item_take_v);
        d_modal_item[1] = d_fused_item.cwiseProduct(
            MatrixX<Scalar>::Ones(item_take_v.rows(), item_take_v.cols()) -
            item_take_v);
        break;
      }
    }
  }

  Gradients<Scalar> grads = zero_gradients(params);
  grads.fusion_logit = d_alpha * alpha * beta;  // d alpha / d logit

  // bipartite adjoint per modality, then projections
  const Scalar reg_coeff = Scalar(2) * static_cast<Scalar>(lambda) * inv_batch;
  for (std::size_t m = 0; m < num_modalities; ++m) {
    MatrixX<Scalar> g_user = d_modal_user[m];
    MatrixX<Scalar> g_item = d_modal_item[m];
    for (Index l = config.layers_bipartite; l > 0; --l) {
      MatrixX<Scalar> g_user_prev = d_modal_user[m] + ops.user_item * g_item;
      MatrixX<Scalar> g_item_prev = d_modal_item[m] + ops.item_user * g_user;
      g_user = std::move(g_user_prev);
      g_item = std::move(g_item_prev);
    }

    grads.user_embed[m] = g_user;
    if (!reg_full) {
      for (const auto& t : batch) {
        grads.user_embed[m].row(t.user) +=
            reg_coeff * params.user_embed[m].row(t.user);
        g_item.row(t.pos) += reg_coeff * state.item_layer0[m].row(t.pos);
        g_item.row(t.neg) += reg_coeff * state.item_layer0[m].row(t.neg);
      }
    }
    grads.proj_weight[m] = features[m].transpose() * g_item;
    grads.proj_bias[m] = g_item.colwise().sum().transpose();
    grads.proj_weight[m] += reg_coeff * params.proj_weight[m];
    grads.proj_bias[m] += reg_coeff * params.proj_bias[m];
    if (reg_full)
      grads.user_embed[m] += reg_coeff * params.user_embed[m];
  }
  if (reg_full) grads.fusion_logit += reg_coeff * params.fusion_logit;
  return grads;
}

// Standard Adam with bias correction.
template <typename Scalar>
struct AdamState {
  std::vector<MatrixX<Scalar>> m_user_embed, v_user_embed;
  std::vector<MatrixX<Scalar>> m_proj_weight, v_proj_weight;
  std::vector<VectorX<Scalar>> m_proj_bias, v_proj_bias;
  Scalar m_fusion_logit = Scalar(0), v_fusion_logit = Scalar(0);
  Index step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
};

template <typename Scalar>
AdamState<Scalar> make_adam_state(const ModelParams<Scalar>& params) {
  AdamState<Scalar> s;
  for (const auto& m : params.user_embed) {
    s.m_user_embed.push_back(MatrixX<Scalar>::Zero(m.rows(), m.cols()));
    s.v_user_embed.push_back(MatrixX<Scalar>::Zero(m.rows(), m.cols()));
  }
  for (const auto& m : params.proj_weight) {
    s.m_proj_weight.push_back(MatrixX<Scalar>::Zero(m.rows(), m.cols()));
    s.v_proj_weight.push_back(MatrixX<Scalar>::Zero(m.rows(), m.cols()));
  }
  for (const auto& v : params.proj_bias) {
    s.m_proj_bias.push_back(VectorX<Scalar>::Zero(v.size()));
    s.v_proj_bias.push_back(VectorX<Scalar>::Zero(v.size()));
  }
  return s;
}

namespace detail {

template <typename Scalar, typename Tensor>
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                 Scalar lr, const AdamState<Scalar>& s, Scalar bc1, Scalar bc2) {
  m = s.beta1 * m + (Scalar(1) - s.beta1) * grad;
  v = (s.beta2 * v).eval() +
      ((Scalar(1) - s.beta2) * grad.array().square()).matrix();
  param -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + s.epsilon))
               .matrix();
}

}  // namespace detail

template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, Scalar lr) {
  state.step++;
  const Scalar bc1 =
      Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar bc2 =
      Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  for (std::size_t m = 0; m < params.user_embed.size(); ++m) {
    detail::adam_update(params.user_embed[m], grads.user_embed[m],
                        state.m_user_embed[m], state.v_user_embed[m], lr, state,
                        bc1, bc2);
    detail::adam_update(params.proj_weight[m], grads.proj_weight[m],
                        state.m_proj_weight[m], state.v_proj_weight[m], lr,
                        state, bc1, bc2);
    detail::adam_update(params.proj_bias[m], grads.proj_bias[m],
                        state.m_proj_bias[m], state.v_proj_bias[m], lr, state,
                        bc1, bc2);
  }
  auto& ml = state.m_fusion_logit;
  auto& vl = state.v_fusion_logit;
  ml = state.beta1 * ml + (Scalar(1) - state.beta1) * grads.fusion_logit;
  vl = state.beta2 * vl +
       (Scalar(1) - state.beta2) * grads.fusion_logit * grads.fusion_logit;
  params.fusion_logit -=
      lr * (ml / bc1) / (std::sqrt(vl / bc2) + state.epsilon);

  for (const auto& m : params.user_embed)
    if (!m.allFinite()) throw DivergenceError("non-finite parameter update");
  for (const auto& m : params.proj_weight)
    if (!m.allFinite()) throw DivergenceError("non-finite parameter update");
  if (!std::isfinite(static_cast<double>(params.fusion_logit)))
    throw DivergenceError("non-finite fusion logit");
}

struct EpochStats {
  Index epoch;
  double loss;
  double val_recall20;
  double val_ndcg20;
  double alpha;
  double elapsed_ms;
};

struct TrainResult {
  ModelParams<float> best_params;
  std::vector<EpochStats> history;
  Index best_epoch = 0;
  double best_val_recall20 = 0.0;
  bool diverged = false;
};

// Epochs of shuffled mini-batches (positives without replacement), validation
// R@20 after each epoch, patience-based early stopping keeping the best
// checkpoint. Divergence aborts with the last finite checkpoint retained.
TrainResult train(const ModelConfig& model_config,
                  const TrainConfig& train_config, const SplitDataset& split,
                  const GraphOperators<float>& ops,
                  const std::vector<MatrixXf>& features);

}  // namespace duorec
