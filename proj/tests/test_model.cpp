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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "duorec/model.hpp"
#include "testutil.hpp"

using namespace duorec;
using namespace duorec::testing;

namespace {

// One toy world shared by the forward-pass tests.
struct ToyWorld {
  InteractionTable table;
  std::vector<MatrixXd> features;  // visual, textual
  BipartiteGraph bipartite;
  UserCooccurrenceGraph user_graph;
  ItemSemanticGraph item_graph;
  GraphOperators<double> ops;
  ModelConfig config;
  ModelParams<double> params;
};

ToyWorld make_toy(Rng& rng, Index n = 7, Index m = 9, Index dim = 4) {
  ToyWorld w;
  w.table = random_table(n, m, 0.35, rng);
  FeatureMatrix visual = random_features(m, 5, "visual", rng);
  FeatureMatrix textual = random_features(m, 3, "textual", rng);
  w.features = {visual.data.cast<double>(), textual.data.cast<double>()};
  w.bipartite = build_normalized_bipartite(w.table);
  w.user_graph = build_user_cooccurrence(w.table, 3);
  w.item_graph = combine_item_graphs({build_item_semantic_modality(visual, 3),
                                      build_item_semantic_modality(textual, 3)},
                                     {0.1, 0.9});
  w.ops = make_graph_operators<double>(w.bipartite, w.user_graph, w.item_graph);
  w.config.dim = dim;
  w.params = init_params<double>(w.config, {5, 3}, n, rng());
  return w;
}

}  // namespace

TEST_CASE("init_params is deterministic with alpha 0.5 and Xavier bounds") {
  ModelConfig config;
  config.dim = 4;
  const auto a = init_params<double>(config, {4, 6}, 10, 123);
  const auto b = init_params<double>(config, {4, 6}, 10, 123);
  CHECK(a.user_embed[0] == b.user_embed[0]);
  CHECK(a.proj_weight[1] == b.proj_weight[1]);
  CHECK(a.fusion_logit == 0.0);
  CHECK(a.alpha() == doctest::Approx(0.5));
  CHECK(a.proj_bias[0].isZero());

  const auto c = init_params<double>(config, {4, 6}, 10, 124);
  CHECK(a.user_embed[0] != c.user_embed[0]);

  // d_m = 4, d = 4 projection: bound sqrt(6/8)
  const double bound = std::sqrt(6.0 / 8.0);
  CHECK(bound == doctest::Approx(0.8660254).epsilon(1e-6));
  CHECK(a.proj_weight[0].maxCoeff() <= bound);
  CHECK(a.proj_weight[0].minCoeff() >= -bound);
  // with 16 draws in (-bound, bound), expect a spread beyond half the range
  CHECK(a.proj_weight[0].maxCoeff() > 0.2 * bound);
  CHECK(a.proj_weight[0].minCoeff() < -0.2 * bound);
}

TEST_CASE("propagate_bipartite layer examples") {
  SUBCASE("L=0 returns the layer-0 embeddings") {
    Rng rng(1);
    ToyWorld w = make_toy(rng);
    MatrixXd user0 = MatrixXd::Random(w.table.num_users, 4);
    MatrixXd item0 = MatrixXd::Random(w.table.num_items, 4);
    const auto [u, i] = propagate_bipartite(user0, item0, w.ops, 0);
    CHECK(u == user0);
    CHECK(i == item0);
  }
  SUBCASE("single user-item pair with L=1 swaps and sums") {
    InteractionTable t;
    t.num_users = t.num_items = 1;
    t.user_ids = {"u"};
    t.item_ids = {"i"};
    t.pairs = {{0, 0}};
    const BipartiteGraph b = build_normalized_bipartite(t);
    UserCooccurrenceGraph ug{1, 1, {{}}};
    ItemSemanticGraph ig{1, {1.0}, {{}}};
    const auto ops = make_graph_operators<double>(b, ug, ig);
    MatrixXd a(1, 3), c(1, 3);
    a << 1.0, 2.0, -1.0;
    c << 0.5, 0.0, 4.0;
    const auto [u, i] = propagate_bipartite(a, c, ops, 1);
    CHECK(u == (a + c));
    CHECK(i == (c + a));
  }
}

TEST_CASE("sparse propagation matches the dense oracle") {
  Rng rng(202);
  for (int round = 0; round < 30; ++round) {
    ToyWorld w = make_toy(rng, 5 + static_cast<Index>(uniform_index(rng, 8)),
                          5 + static_cast<Index>(uniform_index(rng, 10)));
    MatrixXd user0 = MatrixXd::Random(w.table.num_users, 4);
    MatrixXd item0 = MatrixXd::Random(w.table.num_items, 4);
    const auto [u, i] = propagate_bipartite(user0, item0, w.ops, 2);
    const auto [ou, oi] = dense_bipartite_oracle(w.table, user0, item0, 2);
    CHECK((u - ou).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, ou.cwiseAbs().maxCoeff()));
    CHECK((i - oi).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, oi.cwiseAbs().maxCoeff()));

    MatrixXd h0 = MatrixXd::Random(w.table.num_users, 6);
    const MatrixXd hu = propagate_user_graph(h0, w.ops, 1);
    const MatrixXd hu_oracle =
        dense_homogeneous_oracle(w.user_graph.neighbors, h0, 1);
    CHECK((hu - hu_oracle).cwiseAbs().maxCoeff() < 1e-6);

    MatrixXd hi0 = MatrixXd::Random(w.table.num_items, 6);
    const MatrixXd hi = propagate_item_graph(hi0, w.ops, 1);
    const MatrixXd hi_oracle =
        dense_homogeneous_oracle(w.item_graph.neighbors, hi0, 1);
    CHECK((hi - hi_oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("fuse implements the four modes") {
  MatrixXd u_v(1, 2), u_t(1, 2), i_v(1, 2), i_t(1, 2);
  u_v << 2, 0;
  u_t << 0, 4;
  i_v << 1, 2;
  i_t << 3, 4;

  SUBCASE("attentive concatenation weights users, not items") {
    const auto [u_f, i_f] =
        fuse<double>({u_v, u_t}, {i_v, i_t}, 0.5, FusionMode::kAttentiveConcat);
    MatrixXd expected_u(1, 4), expected_i(1, 4);
    expected_u << 1, 0, 0, 2;
    expected_i << 1, 2, 3, 4;
    CHECK(u_f == expected_u);
    CHECK(i_f == expected_i);
  }
  SUBCASE("weighted sum") {
    MatrixXd a(1, 2), b(1, 2);
    a << 4, 0;
    b << 0, 8;
    const auto [u_f, i_f] =
        fuse<double>({a, b}, {i_v, i_t}, 0.25, FusionMode::kWeightedSum);
    MatrixXd expected(1, 2);
    expected << 1, 6;
    CHECK(u_f == expected);
    CHECK(i_f == (i_v + i_t));
  }
  SUBCASE("mean") {
    const auto [u_f, i_f] =
        fuse<double>({u_v, u_t}, {i_v, i_t}, 0.9, FusionMode::kMean);
    CHECK(u_f == ((u_v + u_t) / 2.0));
    CHECK(i_f == ((i_v + i_t) / 2.0));
  }
  SUBCASE("weighted max") {
    const auto [u_f, i_f] =
        fuse<double>({u_v, u_t}, {i_v, i_t}, 0.5, FusionMode::kWeightedMax);
    MatrixXd expected_u(1, 2), expected_i(1, 2);
    expected_u << 1, 2;  // max(0.5*[2,0], 0.5*[0,4])
    expected_i << 3, 4;  // max([1,2],[3,4])
    CHECK(u_f == expected_u);
    CHECK(i_f == expected_i);
  }
  SUBCASE("single modality passes through at width d") {
    const auto [u_f, i_f] =
        fuse<double>({u_v}, {i_v}, 0.5, FusionMode::kAttentiveConcat);
    CHECK(u_f == u_v);
    CHECK(i_f == i_v);
  }
}

TEST_CASE("integrate composes by component mode") {
  MatrixXd u_f(1, 2), h_u(1, 2), i_f(1, 2), h_i(1, 2);
  u_f << 1, 2;
  h_u << 3, 4;
  i_f << 5, 6;
  h_i << 7, 8;

  const auto [zu_full, zi_full] =
      integrate(u_f, h_u, i_f, h_i, ComponentMode::kFull);
  MatrixXd expected_u(1, 2);
  expected_u << 4, 6;
  CHECK(zu_full == expected_u);
  CHECK(zi_full == (i_f + h_i));

  const auto [zu_uu, zi_uu] =
      integrate(u_f, h_u, i_f, h_i, ComponentMode::kUiPlusUu);
  CHECK(zu_uu == (u_f + h_u));
  CHECK(zi_uu == i_f);

  const auto [zu_ui, zi_ui] =
      integrate(u_f, h_u, i_f, h_i, ComponentMode::kUiOnly);
  CHECK(zu_ui == u_f);
  CHECK(zi_ui == i_f);

  // an isolated user's homogeneous output is zero, so z reduces to u_f
  const auto [zu_iso, unused] = integrate(
      u_f, MatrixXd::Zero(1, 2), i_f, h_i, ComponentMode::kFull);
  CHECK(zu_iso == u_f);

  MatrixXd bad(1, 3);
  CHECK_THROWS_AS(integrate(u_f, bad, i_f, h_i, ComponentMode::kFull),
                  DataError);
}

TEST_CASE("score is the inner product") {
  VectorXd a(4), b(4);
  a << 1, 0, 2, 0;
  b << 3, 0, 1, 0;
  CHECK(score<double>(a, b) == doctest::Approx(5.0));
  CHECK(score<double>(a, VectorXd::Zero(4)) == 0.0);

  Rng rng(3);
  VectorXd x(8), y(8);
  for (Index c = 0; c < 8; ++c) {
    x[c] = 2.0 * uniform01(rng) - 1.0;
    y[c] = 2.0 * uniform01(rng) - 1.0;
  }
  double oracle = 0.0;
  for (Index c = 0; c < 8; ++c) oracle += x[c] * y[c];
  CHECK(score<double>(x, y) == doctest::Approx(oracle).epsilon(1e-12));

  VectorXd short_vec(3);
  CHECK_THROWS_AS(score<double>(a, short_vec), DataError);
}

TEST_CASE("forward composes the stages and stays finite") {
  Rng rng(404);
  ToyWorld w = make_toy(rng);

  const ForwardState<double> state =
      forward(w.params, w.features, w.ops, w.config);
  CHECK(state.z_user.cols() == 2 * w.config.dim);
  CHECK(state.z_item.cols() == 2 * w.config.dim);
  CHECK(state.z_user.allFinite());

  // hand-compose the stages through the public ops
  std::vector<MatrixXd> modal_user, modal_item;
  for (std::size_t m = 0; m < 2; ++m) {
    MatrixXd item0 = w.features[m] * w.params.proj_weight[m];
    item0.rowwise() += w.params.proj_bias[m].transpose();
    auto [u_m, i_m] = propagate_bipartite(w.params.user_embed[m], item0, w.ops,
                                          w.config.layers_bipartite);
    modal_user.push_back(u_m);
    modal_item.push_back(i_m);
  }
  const auto [u_f, i_f] =
      fuse(modal_user, modal_item, w.params.alpha(), w.config.fusion);
  const MatrixXd h_u = propagate_user_graph(u_f, w.ops, w.config.layers_user);
  const MatrixXd h_i = propagate_item_graph(i_f, w.ops, w.config.layers_item);
  const auto [z_u, z_i] = integrate(u_f, h_u, i_f, h_i, w.config.components);
  CHECK((state.z_user - z_u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((state.z_item - z_i).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ui_only forward with L=0 yields the fused raw embeddings") {
  Rng rng(11);
  ToyWorld w = make_toy(rng);
  ModelConfig config = w.config;
  config.components = ComponentMode::kUiOnly;
  config.layers_bipartite = 1;  // minimum; compare against L=1 composition

  // L=0 is exercised through propagate_bipartite directly
  std::vector<MatrixXd> modal_user, modal_item;
  for (std::size_t m = 0; m < 2; ++m) {
    MatrixXd item0 = w.features[m] * w.params.proj_weight[m];
    item0.rowwise() += w.params.proj_bias[m].transpose();
    auto [u_m, i_m] = propagate_bipartite(w.params.user_embed[m], item0, w.ops, 0);
    CHECK(u_m == w.params.user_embed[m]);
    modal_user.push_back(u_m);
    modal_item.push_back(i_m);
  }
  const auto [u_f, i_f] =
      fuse(modal_user, modal_item, w.params.alpha(), config.fusion);
  const auto [z_u, z_i] =
      integrate(u_f, MatrixXd(), i_f, MatrixXd(), ComponentMode::kUiOnly);
  CHECK(z_u == u_f);
  CHECK(z_i == i_f);
}

TEST_CASE("ui_only outputs ignore the homogeneous graph weights") {
  Rng rng(606);
  ToyWorld w = make_toy(rng);
  w.config.components = ComponentMode::kUiOnly;
  const ForwardState<double> base = forward(w.params, w.features, w.ops, w.config);

  // perturb both homogeneous graphs
  UserCooccurrenceGraph perturbed_user = w.user_graph;
  for (auto& row : perturbed_user.neighbors)
    for (auto& [v, weight] : row) weight *= 0.37;
  ItemSemanticGraph perturbed_item = w.item_graph;
  for (auto& row : perturbed_item.neighbors)
    for (auto& [v, weight] : row) weight *= 2.9;
  const auto ops2 =
      make_graph_operators<double>(w.bipartite, perturbed_user, perturbed_item);
  const ForwardState<double> other = forward(w.params, w.features, ops2, w.config);
  CHECK(base.z_user == other.z_user);
  CHECK(base.z_item == other.z_item);
}

TEST_CASE("pipeline is linear: scaling embeddings scales scores by c^2") {
  Rng rng(707);
  ToyWorld w = make_toy(rng);
  const ForwardState<double> base = forward(w.params, w.features, w.ops, w.config);

  const double c = 2.0;
  ModelParams<double> scaled = w.params;
  for (auto& e : scaled.user_embed) e *= c;
  for (auto& p : scaled.proj_weight) p *= c;
  for (auto& b : scaled.proj_bias) b *= c;
  const ForwardState<double> big = forward(scaled, w.features, w.ops, w.config);

  CHECK((big.z_user - c * base.z_user).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((big.z_item - c * base.z_item).cwiseAbs().maxCoeff() < 1e-9);
  const double s0 =
      score<double>(base.z_user.row(0).transpose(), base.z_item.row(0).transpose());
  const double s1 =
      score<double>(big.z_user.row(0).transpose(), big.z_item.row(0).transpose());
  CHECK(s1 == doctest::Approx(c * c * s0).epsilon(1e-9));
}

TEST_CASE("all-zero layer-0 embeddings propagate to zero") {
  Rng rng(808);
  ToyWorld w = make_toy(rng);
  MatrixXd zu = MatrixXd::Zero(w.table.num_users, 4);
  MatrixXd zi = MatrixXd::Zero(w.table.num_items, 4);
  const auto [u, i] = propagate_bipartite(zu, zi, w.ops, 3);
  CHECK(u.isZero());
  CHECK(i.isZero());
}

TEST_CASE("single-modality forward has width d and valid scoring") {
  Rng rng(909);
  ToyWorld w = make_toy(rng);
  ModelConfig config = w.config;
  config.modalities = {"textual"};
  const auto item_graph = item_graph_from_single(
      build_item_semantic_modality({/*modality=*/"textual", MatrixXf::Random(9, 3)}, 3));
  ModelParams<double> params = init_params<double>(config, {3}, 7, 42);
  const auto ops = make_graph_operators<double>(w.bipartite, w.user_graph, item_graph);
  std::vector<MatrixXd> features = {MatrixXd::Random(9, 3)};
  const ForwardState<double> state = forward(params, features, ops, config);
  CHECK(state.z_user.cols() == config.dim);
  CHECK(state.z_item.cols() == config.dim);
  CHECK(std::isfinite(score<double>(state.z_user.row(0).transpose(),
                                    state.z_item.row(0).transpose())));
}
