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

#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <vector>

#include "duorec/graphs.hpp"
#include "duorec/types.hpp"

namespace duorec {

enum class FusionMode { kAttentiveConcat, kWeightedSum, kMean, kWeightedMax };
enum class ComponentMode { kUiOnly, kUiPlusUu, kFull };

FusionMode fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode mode);
ComponentMode component_mode_from_string(const std::string& s);
std::string to_string(ComponentMode mode);

// Canonical modality order is visual before textual; parsing normalizes it.
std::vector<std::string> modalities_from_string(const std::string& s);
std::string modalities_to_string(const std::vector<std::string>& modalities);

struct ModelConfig {
  Index dim = 64;             // embedding width d
  Index layers_bipartite = 2;  // L
  Index layers_user = 1;       // L_u
  Index layers_item = 1;       // L_i
  FusionMode fusion = FusionMode::kAttentiveConcat;
  ComponentMode components = ComponentMode::kFull;
  std::vector<std::string> modalities = {"visual", "textual"};
  bool item_graph_row_norm = false;

  bool multimodal() const { return modalities.size() == 2; }
  // Width of the fused/integrated representations.
  Index fused_dim() const {
    return (multimodal() && fusion == FusionMode::kAttentiveConcat) ? 2 * dim
                                                                    : dim;
  }
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// ln(1 + e^x) without overflow; -ln(sigmoid(d)) == softplus(-d).
template <typename Scalar>
Scalar softplus(Scalar x) {
  if (x > Scalar(0)) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// All trainable tensors. Per-modality vectors follow config.modalities order.
template <typename Scalar>
struct ModelParams {
  std::vector<MatrixX<Scalar>> user_embed;   // N x d each
  std::vector<MatrixX<Scalar>> proj_weight;  // d_m x d each
  std::vector<VectorX<Scalar>> proj_bias;    // d each
  Scalar fusion_logit = Scalar(0);           // alpha = sigmoid(logit)

  Scalar alpha() const { return sigmoid(fusion_logit); }

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    for (const auto& m : user_embed) out.user_embed.push_back(m.template cast<Other>());
    for (const auto& m : proj_weight) out.proj_weight.push_back(m.template cast<Other>());
    for (const auto& v : proj_bias) out.proj_bias.push_back(v.template cast<Other>());
    out.fusion_logit = static_cast<Other>(fusion_logit);
    return out;
  }
};

// Sparse operators shared by forward and backward passes. Weights are frozen;
// no gradient ever flows into them.
template <typename Scalar>
struct GraphOperators {
  Index num_users = 0;
  Index num_items = 0;
  Eigen::SparseMatrix<Scalar> user_item;    // N x M, 1/sqrt(deg_u deg_i)
  Eigen::SparseMatrix<Scalar> item_user;    // M x N, transpose
  Eigen::SparseMatrix<Scalar> user_user;    // N x N, softmax co-occurrence
  Eigen::SparseMatrix<Scalar> user_user_t;  // transpose for backward
  Eigen::SparseMatrix<Scalar> item_item;    // M x M, frozen semantic weights
  Eigen::SparseMatrix<Scalar> item_item_t;
};

template <typename Scalar>
GraphOperators<Scalar> make_graph_operators(const BipartiteGraph& bipartite,
                                            const UserCooccurrenceGraph& users,
                                            const ItemSemanticGraph& items,
                                            bool item_graph_row_norm = false) {
  using Triplet = Eigen::Triplet<Scalar>;
  GraphOperators<Scalar> ops;
  ops.num_users = bipartite.num_users;
  ops.num_items = bipartite.num_items;

  std::vector<Triplet> tri;
  tri.reserve(bipartite.edges.size());
  for (const auto& e : bipartite.edges)
    tri.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col),
                     static_cast<Scalar>(e.weight));
  ops.user_item.resize(ops.num_users, ops.num_items);
  ops.user_item.setFromTriplets(tri.begin(), tri.end());
  ops.item_user = ops.user_item.transpose();

  tri.clear();
  for (Index u = 0; u < users.num_users; ++u)
    for (const auto& [v, w] : users.neighbors[static_cast<std::size_t>(u)])
      tri.emplace_back(static_cast<int>(u), static_cast<int>(v),
                       static_cast<Scalar>(w));
  ops.user_user.resize(users.num_users, users.num_users);
  ops.user_user.setFromTriplets(tri.begin(), tri.end());
  ops.user_user_t = ops.user_user.transpose();

  tri.clear();
  for (Index i = 0; i < items.num_items; ++i) {
    const auto& row = items.neighbors[static_cast<std::size_t>(i)];
    double row_sum = 0.0;
    if (item_graph_row_norm)
      for (const auto& [j, w] : row) row_sum += w;
    for (const auto& [j, w] : row) {
      const double adjusted = item_graph_row_norm && row_sum > 0.0 ? w / row_sum : w;
      tri.emplace_back(static_cast<int>(i), static_cast<int>(j),
                       static_cast<Scalar>(adjusted));
    }
  }
  ops.item_item.resize(items.num_items, items.num_items);
  ops.item_item.setFromTriplets(tri.begin(), tri.end());
  ops.item_item_t = ops.item_item.transpose();
  return ops;
}

// Xavier-uniform fill: bound = sqrt(6 / (rows + cols)), element order is
// row-major so the stream of draws is well defined.
template <typename Scalar>
void xavier_fill(MatrixX<Scalar>& m, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = static_cast<Scalar>(bound * (2.0 * uniform01(rng) - 1.0));
}

// User embeddings and feature projections are Xavier-initialized from the
// seeded generator; biases start at zero and alpha at 0.5.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelConfig& config,
                                const std::vector<Index>& feature_dims,
                                Index num_users, std::uint64_t seed) {
  if (feature_dims.size() != config.modalities.size())
    throw ConfigError("init_params: one feature dim per modality required");
  ModelParams<Scalar> params;
  Rng rng(mix_seed(seed, 0x696e6974ULL));
  for (std::size_t m = 0; m < config.modalities.size(); ++m) {
    MatrixX<Scalar> embed(num_users, config.dim);
    xavier_fill(embed, rng);
    params.user_embed.push_back(std::move(embed));
    MatrixX<Scalar> weight(feature_dims[m], config.dim);
    xavier_fill(weight, rng);
    params.proj_weight.push_back(std::move(weight));
    params.proj_bias.push_back(VectorX<Scalar>::Zero(config.dim));
  }
  params.fusion_logit = Scalar(0);
  return params;
}

// Per-step intermediates cached for the backward pass.
template <typename Scalar>
struct ForwardState {
  std::vector<MatrixX<Scalar>> item_layer0;  // i_m^(0) = X_m W_m + 1 b_m^T
  std::vector<MatrixX<Scalar>> modal_user;   // u_m, layer sum
  std::vector<MatrixX<Scalar>> modal_item;   // i_m, layer sum
  MatrixX<Scalar> fused_user;                // u_f
  MatrixX<Scalar> fused_item;                // i_f
  MatrixX<Scalar> user_homo;                 // h_u^(L_u)
  MatrixX<Scalar> item_homo;                 // h_i^(L_i)
  MatrixX<Scalar> z_user;
  MatrixX<Scalar> z_item;
};

// L rounds of symmetric-normalized message passing from the layer-0
// embeddings, followed by an element-wise sum over layers 0..L.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> propagate_bipartite(
    const MatrixX<Scalar>& user_layer0, const MatrixX<Scalar>& item_layer0,
    const GraphOperators<Scalar>& ops, Index layers) {
  MatrixX<Scalar> u = user_layer0;
  MatrixX<Scalar> i = item_layer0;
  MatrixX<Scalar> u_sum = u;
  MatrixX<Scalar> i_sum = i;
  for (Index l = 0; l < layers; ++l) {
    MatrixX<Scalar> u_next = ops.user_item * i;
    MatrixX<Scalar> i_next = ops.item_user * u;
    u = std::move(u_next);
    i = std::move(i_next);
    u_sum += u;
    i_sum += i;
  }
  return {std::move(u_sum), std::move(i_sum)};
}

// Multimodal fusion. With both modalities present, users are attentively
// weighted by alpha while items concatenate unweighted; the ablation modes
// replace concatenation with their element-wise analogue. A single modality
// passes through untouched (width d).
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> fuse(
    const std::vector<MatrixX<Scalar>>& modal_user,
    const std::vector<MatrixX<Scalar>>& modal_item, Scalar alpha,
    FusionMode mode) {
  if (modal_user.empty() || modal_user.size() != modal_item.size())
    throw ConfigError("fuse: need matching per-modality inputs");
  if (modal_user.size() == 1) return {modal_user[0], modal_item[0]};
  if (modal_user.size() != 2)
    throw ConfigError("fuse: only one or two modalities are supported");

  const auto& u_v = modal_user[0];
  const auto& u_t = modal_user[1];
  const auto& i_v = modal_item[0];
  const auto& i_t = modal_item[1];
  const Scalar beta = Scalar(1) - alpha;

  MatrixX<Scalar> u_f, i_f;
  switch (mode) {
    case FusionMode::kAttentiveConcat:
      u_f.resize(u_v.rows(), u_v.cols() + u_t.cols());
      u_f << alpha * u_v, beta * u_t;
      i_f.resize(i_v.rows(), i_v.cols() + i_t.cols());
      i_f << i_v, i_t;
      break;
    case FusionMode::kWeightedSum:
      u_f = alpha * u_v + beta * u_t;
      i_f = i_v + i_t;
      break;
    case FusionMode::kMean:
      u_f = (u_v + u_t) / Scalar(2);
      i_f = (i_v + i_t) / Scalar(2);
      break;
    case FusionMode::kWeightedMax:
      u_f = (alpha * u_v).cwiseMax(beta * u_t);
      i_f = i_v.cwiseMax(i_t);
      break;
  }
  return {std::move(u_f), std::move(i_f)};
}

// Homogeneous propagation: layers of weighted neighbor sums starting from the
// fused representations. Nodes without neighbors go to zero at layers >= 1.
template <typename Scalar>
MatrixX<Scalar> propagate_homogeneous(const MatrixX<Scalar>& fused,
                                      const Eigen::SparseMatrix<Scalar>& weights,
                                      Index layers) {
  MatrixX<Scalar> h = fused;
  for (Index l = 0; l < layers; ++l) h = weights * h;
  return h;
}

template <typename Scalar>
MatrixX<Scalar> propagate_user_graph(const MatrixX<Scalar>& fused_user,
                                     const GraphOperators<Scalar>& ops,
                                     Index layers) {
  return propagate_homogeneous(fused_user, ops.user_user, layers);
}

template <typename Scalar>
MatrixX<Scalar> propagate_item_graph(const MatrixX<Scalar>& fused_item,
                                     const GraphOperators<Scalar>& ops,
                                     Index layers) {
  return propagate_homogeneous(fused_item, ops.item_item, layers);
}

// Element-wise integration of the heterogeneous and homogeneous outputs.
// kUiPlusUu gives only users a dual representation; kUiOnly neither.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> integrate(
    const MatrixX<Scalar>& fused_user, const MatrixX<Scalar>& user_homo,
    const MatrixX<Scalar>& fused_item, const MatrixX<Scalar>& item_homo,
    ComponentMode mode) {
  switch (mode) {
    case ComponentMode::kUiOnly:
      return {fused_user, fused_item};
    case ComponentMode::kUiPlusUu:
      if (user_homo.rows() != fused_user.rows() ||
          user_homo.cols() != fused_user.cols())
        throw DataError("integrate: user width mismatch");
      return {fused_user + user_homo, fused_item};
    case ComponentMode::kFull:
      if (user_homo.rows() != fused_user.rows() ||
          user_homo.cols() != fused_user.cols() ||
          item_homo.rows() != fused_item.rows() ||
          item_homo.cols() != fused_item.cols())
        throw DataError("integrate: width mismatch");
      return {fused_user + user_homo, fused_item + item_homo};
  }
  throw ConfigError("integrate: unknown component mode");
}

template <typename Scalar>
Scalar score(const Eigen::Ref<const VectorX<Scalar>>& z_user,
             const Eigen::Ref<const VectorX<Scalar>>& z_item) {
  if (z_user.size() != z_item.size())
    throw DataError("score: representation widths differ");
  return z_user.dot(z_item);
}

template <typename Scalar>
ForwardState<Scalar> forward(const ModelParams<Scalar>& params,
                             const std::vector<MatrixX<Scalar>>& features,
                             const GraphOperators<Scalar>& ops,
                             const ModelConfig& config) {
  ForwardState<Scalar> state;
  const std::size_t num_modalities = config.modalities.size();
  state.item_layer0.reserve(num_modalities);
  state.modal_user.reserve(num_modalities);
  state.modal_item.reserve(num_modalities);

  for (std::size_t m = 0; m < num_modalities; ++m) {
    MatrixX<Scalar> item0 = features[m] * params.proj_weight[m];
    item0.rowwise() += params.proj_bias[m].transpose();
    auto [u_m, i_m] = propagate_bipartite(params.user_embed[m], item0, ops,
                                          config.layers_bipartite);
    state.item_layer0.push_back(std::move(item0));
    state.modal_user.push_back(std::move(u_m));
    state.modal_item.push_back(std::move(i_m));
  }

  std::tie(state.fused_user, state.fused_item) =
      fuse(state.modal_user, state.modal_item, params.alpha(), config.fusion);

  if (config.components != ComponentMode::kUiOnly)
    state.user_homo = propagate_user_graph(state.fused_user, ops, config.layers_user);
  else
    state.user_homo = MatrixX<Scalar>::Zero(state.fused_user.rows(),
                                            state.fused_user.cols());
  if (config.components == ComponentMode::kFull)
    state.item_homo = propagate_item_graph(state.fused_item, ops, config.layers_item);
  else
    state.item_homo = MatrixX<Scalar>::Zero(state.fused_item.rows(),
                                            state.fused_item.cols());

  std::tie(state.z_user, state.z_item) =
      integrate(state.fused_user, state.user_homo, state.fused_item,
                state.item_homo, config.components);

  if (!state.z_user.allFinite() || !state.z_item.allFinite())
    throw DivergenceError("forward pass produced non-finite representations");
  return state;
}

}  // namespace duorec
