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
#include "duorec/gradcheck.hpp"

#include <cmath>
#include <numeric>

namespace duorec {

namespace {

// Random interaction table where every user and item has degree >= 1.
InteractionTable random_toy_table(Index num_users, Index num_items, Rng& rng) {
  InteractionTable table;
  table.num_users = num_users;
  table.num_items = num_items;
  for (Index u = 0; u < num_users; ++u)
    table.user_ids.push_back("u" + std::to_string(u));
  for (Index i = 0; i < num_items; ++i)
    table.item_ids.push_back("i" + std::to_string(i));
  for (Index u = 0; u < num_users; ++u) {
    const Index degree = 2 + static_cast<Index>(uniform_index(rng, 3));
    std::vector<Index> items(static_cast<std::size_t>(num_items));
    std::iota(items.begin(), items.end(), 0);
    shuffle_inplace(items, rng);
    for (Index d = 0; d < degree; ++d) table.pairs.emplace_back(u, items[d]);
  }
  for (Index i = 0; i < num_items; ++i) {
    const Index u = static_cast<Index>(uniform_index(rng, num_users));
    table.pairs.emplace_back(u, i);
  }
  std::sort(table.pairs.begin(), table.pairs.end());
  table.pairs.erase(std::unique(table.pairs.begin(), table.pairs.end()),
                    table.pairs.end());
  return table;
}

FeatureMatrix random_features(Index rows, Index dim, const std::string& modality,
                              Rng& rng) {
  FeatureMatrix f;
  f.modality = modality;
  f.data.resize(rows, dim);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < dim; ++c)
      f.data(r, c) = static_cast<float>(2.0 * uniform01(rng) - 1.0);
  return f;
}

// Visits every coordinate of every tensor: callback(param_name, flat_index,
// reference). Row-major flat order within each tensor.
template <typename Scalar, typename Callback>
void visit_params(ModelParams<Scalar>& params,
                  const std::vector<std::string>& modalities, Callback&& cb) {
  for (std::size_t m = 0; m < modalities.size(); ++m) {
    Index flat = 0;
    for (Index r = 0; r < params.user_embed[m].rows(); ++r)
      for (Index c = 0; c < params.user_embed[m].cols(); ++c)
        cb("user_embed[" + modalities[m] + "]", flat++,
           params.user_embed[m](r, c));
    flat = 0;
    for (Index r = 0; r < params.proj_weight[m].rows(); ++r)
      for (Index c = 0; c < params.proj_weight[m].cols(); ++c)
        cb("proj_weight[" + modalities[m] + "]", flat++,
           params.proj_weight[m](r, c));
    flat = 0;
    for (Index r = 0; r < params.proj_bias[m].size(); ++r)
      cb("proj_bias[" + modalities[m] + "]", flat++, params.proj_bias[m](r));
  }
  cb("fusion_logit", Index(0), params.fusion_logit);
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckOptions& options,
                              const GradientPerturbation& perturb) {
  Rng rng(mix_seed(options.seed, 0x6763ULL));
  const InteractionTable table =
      random_toy_table(options.num_users, options.num_items, rng);
  const FeatureMatrix visual =
      random_features(options.num_items, options.dim_visual, "visual", rng);
  const FeatureMatrix textual =
      random_features(options.num_items, options.dim_textual, "textual", rng);

  const BipartiteGraph bipartite = build_normalized_bipartite(table);
  const UserCooccurrenceGraph user_graph = build_user_cooccurrence(table, 3);
  const ItemKnnGraph knn_visual = build_item_semantic_modality(visual, 3);
  const ItemKnnGraph knn_textual = build_item_semantic_modality(textual, 3);
  const ItemSemanticGraph item_both =
      combine_item_graphs({knn_visual, knn_textual}, {0.1, 0.9});

  struct ModalitySetup {
    std::vector<std::string> modalities;
    std::vector<MatrixXd> features;
    GraphOperators<double> ops;
  };
  std::vector<ModalitySetup> setups;
  setups.push_back({{"visual", "textual"},
                    {visual.data.cast<double>(), textual.data.cast<double>()},
                    make_graph_operators<double>(bipartite, user_graph, item_both)});
  setups.push_back({{"visual"},
                    {visual.data.cast<double>()},
                    make_graph_operators<double>(
                        bipartite, user_graph, item_graph_from_single(knn_visual))});
  setups.push_back({{"textual"},
                    {textual.data.cast<double>()},
                    make_graph_operators<double>(
                        bipartite, user_graph, item_graph_from_single(knn_textual))});

  GradCheckReport report;
  for (ComponentMode components :
       {ComponentMode::kUiOnly, ComponentMode::kUiPlusUu, ComponentMode::kFull}) {
    for (FusionMode fusion :
         {FusionMode::kAttentiveConcat, FusionMode::kWeightedSum,
          FusionMode::kMean, FusionMode::kWeightedMax}) {
      for (const ModalitySetup& setup : setups) {
        ModelConfig config;
        config.dim = options.dim;
        config.layers_bipartite = 2;
        config.layers_user = 1;
        config.layers_item = 1;
        config.fusion = fusion;
        config.components = components;
        config.modalities = setup.modalities;

        std::vector<Index> feature_dims;
        for (const auto& f : setup.features) feature_dims.push_back(f.cols());
        const std::uint64_t combo_seed =
            mix_seed(options.seed,
                     static_cast<std::uint64_t>(report.combos.size()) + 101);
        ModelParams<double> params = init_params<double>(
            config, feature_dims, options.num_users, combo_seed);
        // keep alpha away from the symmetric point so its gradient is informative
        params.fusion_logit = 0.25;

        Rng batch_rng(mix_seed(combo_seed, 0x626174ULL));
        const std::vector<Triplet> batch =
            sample_triplets(table, options.batch_size, batch_rng);

        const auto loss_of = [&](const ModelParams<double>& p) {
          ForwardState<double> state = forward(p, setup.features, setup.ops, config);
          return bpr_loss(state, batch, options.lambda, p);
        };

        ForwardState<double> state =
            forward(params, setup.features, setup.ops, config);
        Gradients<double> grads =
            backward(params, setup.features, setup.ops, config, state, batch,
                     options.lambda);

        GradCheckComboResult combo;
        combo.components = to_string(components);
        combo.fusion = to_string(fusion);
        combo.modalities = modalities_to_string(setup.modalities);
        if (perturb) perturb(grads, combo.name());

        // flatten analytic gradients in the same visit order as the params
        std::vector<double> analytic;
        {
          Gradients<double>* gp = &grads;
          ModelParams<double> shim;  // reuse the visitor by aliasing tensors
          shim.user_embed = gp->user_embed;
          shim.proj_weight = gp->proj_weight;
          shim.proj_bias = gp->proj_bias;
          shim.fusion_logit = gp->fusion_logit;
          visit_params(shim, setup.modalities,
                       [&](const std::string&, Index, double& value) {
                         analytic.push_back(value);
                       });
        }

        std::size_t cursor = 0;
        visit_params(
            params, setup.modalities,
            [&](const std::string& name, Index coord, double& value) {
              const double saved = value;
              value = saved + options.step;
              const double loss_hi = loss_of(params);
              value = saved - options.step;
              const double loss_lo = loss_of(params);
              value = saved;

              const double numeric = (loss_hi - loss_lo) / (2.0 * options.step);
              const double a = analytic[cursor++];
              const double denom = std::max(std::abs(a), std::abs(numeric));
              double error;
              bool ok;
              if (denom < options.small_threshold) {
                error = std::abs(a - numeric);
                ok = error < options.abs_tol;
              } else {
                error = std::abs(a - numeric) / denom;
                ok = error < options.rel_tol;
              }
              combo.coords_checked++;
              combo.max_error = std::max(combo.max_error, error);
              if (!ok) combo.issues.push_back({name, coord, a, numeric, error});
            });
        report.combos.push_back(std::move(combo));
      }
    }
  }
  return report;
}

}  // namespace duorec
