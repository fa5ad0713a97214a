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

#include <set>

#include "duorec/features.hpp"
#include "duorec/interactions.hpp"
#include "testutil.hpp"

using namespace duorec;
using namespace duorec::testing;

TEST_CASE("load_interactions dedups and indexes by first occurrence") {
  TempDir dir("load");
  write_text(dir.file("i.tsv"), "a\tx\na\tx\nb\ty\n");
  const InteractionTable t = load_interactions(dir.file("i.tsv"));
  CHECK(t.num_users == 2);
  CHECK(t.num_items == 2);
  CHECK(t.pairs == std::vector<std::pair<Index, Index>>{{0, 0}, {1, 1}});
  CHECK(t.user_ids == std::vector<std::string>{"a", "b"});
  CHECK(t.item_ids == std::vector<std::string>{"x", "y"});
}

TEST_CASE("load_interactions skips comments and extra fields") {
  TempDir dir("load2");
  write_text(dir.file("i.tsv"),
             "# a comment\nu1\ti1\t4.5\t123456\nu1\ti2\nu2\ti1\nu2\ti2\nu2\ti3\n");
  const InteractionTable t = load_interactions(dir.file("i.tsv"));
  CHECK(t.num_users == 2);
  CHECK(t.num_items == 3);
  CHECK(t.num_pairs() == 5);
}

TEST_CASE("load_interactions errors") {
  TempDir dir("load3");
  CHECK_THROWS_AS(load_interactions(dir.file("missing.tsv")), DataError);

  write_text(dir.file("empty.tsv"), "");
  CHECK_THROWS_WITH_AS(load_interactions(dir.file("empty.tsv")),
                       doctest::Contains("empty table"), DataError);

  write_text(dir.file("bad.tsv"), "u1\ti1\nno_tab_here\n");
  CHECK_THROWS_WITH_AS(load_interactions(dir.file("bad.tsv")),
                       doctest::Contains(":2"), DataError);
}

TEST_CASE("load is stable under re-load") {
  TempDir dir("load4");
  write_text(dir.file("i.tsv"), "c\tz\na\tx\nb\ty\nc\tx\n");
  const InteractionTable t1 = load_interactions(dir.file("i.tsv"));
  const InteractionTable t2 = load_interactions(dir.file("i.tsv"));
  CHECK(t1.pairs == t2.pairs);
  CHECK(t1.user_ids == t2.user_ids);
  CHECK(t1.item_ids == t2.item_ids);
}

namespace {

InteractionTable table_from_pairs(Index n, Index m,
                                  std::vector<std::pair<Index, Index>> pairs) {
  InteractionTable t;
  t.num_users = n;
  t.num_items = m;
  for (Index u = 0; u < n; ++u) t.user_ids.push_back("u" + std::to_string(u));
  for (Index i = 0; i < m; ++i) t.item_ids.push_back("i" + std::to_string(i));
  std::sort(pairs.begin(), pairs.end());
  t.pairs = std::move(pairs);
  return t;
}

}  // namespace

TEST_CASE("kcore keeps a table already at the fixed point") {
  // complete bipartite 3x3, k=3
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < 3; ++u)
    for (Index i = 0; i < 3; ++i) pairs.emplace_back(u, i);
  const InteractionTable t = table_from_pairs(3, 3, pairs);
  const InteractionTable out = kcore_filter(t, 3);
  CHECK(out.num_users == 3);
  CHECK(out.num_items == 3);
  CHECK(out.num_pairs() == 9);
}

TEST_CASE("kcore peels the chain example to an empty table") {
  // u0-i0, u0-i1, u1-i1 with k=2: removing u1 drops i1 under k, then u0
  const InteractionTable t = table_from_pairs(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  CHECK_THROWS_AS(kcore_filter(t, 2), DataError);
}

TEST_CASE("kcore is idempotent and matches the peeling oracle") {
  Rng rng(2026);
  for (int round = 0; round < 100; ++round) {
    const Index n = 2 + static_cast<Index>(uniform_index(rng, 29));
    const Index m = 2 + static_cast<Index>(uniform_index(rng, 29));
    const InteractionTable t = random_table(n, m, 0.15, rng);
    const Index k = 1 + static_cast<Index>(uniform_index(rng, 4));

    const auto [oracle_users, oracle_items] = kcore_peeling_oracle(t, k);
    InteractionTable filtered;
    try {
      filtered = kcore_filter(t, k);
    } catch (const DataError&) {
      CHECK(oracle_users.empty());
      continue;
    }
    const std::set<std::string> users(filtered.user_ids.begin(),
                                      filtered.user_ids.end());
    const std::set<std::string> items(filtered.item_ids.begin(),
                                      filtered.item_ids.end());
    CHECK(users == oracle_users);
    CHECK(items == oracle_items);

    const InteractionTable twice = kcore_filter(filtered, k);
    CHECK(twice.pairs == filtered.pairs);
    CHECK(twice.user_ids == filtered.user_ids);
  }
}

TEST_CASE("split follows the ceiling rule") {
  SUBCASE("degree 10 gives 8/1/1") {
    std::vector<std::pair<Index, Index>> pairs;
    for (Index i = 0; i < 10; ++i) pairs.emplace_back(0, i);
    const InteractionTable t = table_from_pairs(1, 10, pairs);
    const SplitDataset s = split_interactions(t, 7);
    CHECK(s.train.num_pairs() == 8);
    CHECK(s.validation.num_pairs() == 1);
    CHECK(s.test.num_pairs() == 1);
  }
  SUBCASE("degree 5 gives 4/1/0") {
    std::vector<std::pair<Index, Index>> pairs;
    for (Index i = 0; i < 5; ++i) pairs.emplace_back(0, i);
    const InteractionTable t = table_from_pairs(1, 5, pairs);
    const SplitDataset s = split_interactions(t, 7);
    CHECK(s.train.num_pairs() == 4);
    CHECK(s.validation.num_pairs() == 1);
    CHECK(s.test.num_pairs() == 0);
  }
}

TEST_CASE("split is deterministic, disjoint and training-covering") {
  Rng rng(99);
  for (int round = 0; round < 25; ++round) {
    const InteractionTable t =
        random_table(3 + static_cast<Index>(uniform_index(rng, 10)),
                     5 + static_cast<Index>(uniform_index(rng, 15)), 0.4, rng);
    const std::uint64_t seed = rng();
    const SplitDataset a = split_interactions(t, seed);
    const SplitDataset b = split_interactions(t, seed);
    CHECK(a.train.pairs == b.train.pairs);
    CHECK(a.validation.pairs == b.validation.pairs);
    CHECK(a.test.pairs == b.test.pairs);

    std::set<std::pair<Index, Index>> all(a.train.pairs.begin(),
                                          a.train.pairs.end());
    CHECK(all.size() == a.train.pairs.size());
    for (const auto& p : a.validation.pairs) CHECK(all.insert(p).second);
    for (const auto& p : a.test.pairs) CHECK(all.insert(p).second);
    CHECK(all == std::set<std::pair<Index, Index>>(t.pairs.begin(),
                                                   t.pairs.end()));

    const auto deg = user_degrees(a.train);
    for (Index u = 0; u < t.num_users; ++u) CHECK(deg[u] >= 1);
  }
}

TEST_CASE("strict split rejects users with fewer than 3 interactions") {
  const InteractionTable t = table_from_pairs(1, 2, {{0, 0}, {0, 1}});
  CHECK_THROWS_AS(split_interactions(t, 1, SplitMode::kPerUser, true),
                  DataError);
  CHECK_NOTHROW(split_interactions(t, 1, SplitMode::kPerUser, false));
}

TEST_CASE("global split keeps the 8:1:1 totals") {
  Rng rng(5);
  const InteractionTable t = random_table(10, 12, 0.5, rng);
  const SplitDataset s = split_interactions(t, 11, SplitMode::kGlobal);
  const Index total = t.num_pairs();
  CHECK(s.train.num_pairs() == (8 * total + 9) / 10);
  CHECK(s.train.num_pairs() + s.validation.num_pairs() + s.test.num_pairs() ==
        total);
}

TEST_CASE("FMAT load validates header, shape and finiteness") {
  TempDir dir("fmat");
  FeatureMatrix f;
  f.modality = "visual";
  f.data.resize(3, 2);
  f.data << 1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f;
  save_feature_matrix(f, dir.file("ok.fmat"));

  const FeatureMatrix loaded = load_feature_matrix(dir.file("ok.fmat"), 3, "visual");
  CHECK(loaded.rows() == 3);
  CHECK(loaded.dim() == 2);
  CHECK(loaded.data == f.data);

  CHECK_THROWS_WITH_AS(load_feature_matrix(dir.file("ok.fmat"), 4, "visual"),
                       doctest::Contains("3 rows"), DataError);

  f.data(1, 1) = std::numeric_limits<float>::quiet_NaN();
  save_feature_matrix(f, dir.file("nan.fmat"));
  CHECK_THROWS_WITH_AS(load_feature_matrix(dir.file("nan.fmat"), 3, "visual"),
                       doctest::Contains("row 1, col 1"), DataError);

  write_text(dir.file("badmagic.fmat"), "NOPE individual bytes");
  CHECK_THROWS_WITH_AS(load_feature_matrix(dir.file("badmagic.fmat"), 3, "visual"),
                       doctest::Contains("magic"), DataError);
}

TEST_CASE("FMAT round-trip is bit-exact") {
  TempDir dir("fmatrt");
  Rng rng(4242);
  const FeatureMatrix f = random_features(17, 9, "textual", rng);
  save_feature_matrix(f, dir.file("a.fmat"));
  const FeatureMatrix loaded = load_feature_matrix(dir.file("a.fmat"), 17, "textual");
  save_feature_matrix(loaded, dir.file("b.fmat"));
  CHECK(read_bytes(dir.file("a.fmat")) == read_bytes(dir.file("b.fmat")));
  CHECK(loaded.data == f.data);
}

TEST_CASE("interactions save/load round-trip preserves the table") {
  TempDir dir("rt");
  Rng rng(17);
  const InteractionTable t = random_table(8, 9, 0.3, rng);
  save_interactions(t, dir.file("t.tsv"));
  const InteractionTable loaded = load_interactions(dir.file("t.tsv"));
  CHECK(loaded.num_users == t.num_users);
  CHECK(loaded.num_items == t.num_items);
  CHECK(loaded.num_pairs() == t.num_pairs());
}
