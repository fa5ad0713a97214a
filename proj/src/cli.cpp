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
#include "duorec/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "duorec/checkpoint.hpp"
#include "duorec/config.hpp"
#include "duorec/eval.hpp"
#include "duorec/gradcheck.hpp"
#include "duorec/graphs.hpp"
#include "duorec/training.hpp"

namespace duorec {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// workspace plumbing

// Guards an output directory against concurrent writers.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw DataError("output directory is locked by another command (" +
                      path_.string() + " exists)");
    }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

void write_kv_file(const fs::path& path, const std::string& banner,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# " << banner << "\n";
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::map<std::string, std::string> read_kv_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + ": malformed line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::pair<std::string, std::string>> config_echo(
    const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& [k, v] : config.values()) kv.emplace_back("config." + k, v);
  return kv;
}

json config_echo_json(const RunConfig& config) {
  json echo = json::object();
  for (const auto& [k, v] : config.values()) echo[k] = v;
  return echo;
}

void save_id_map(const std::vector<std::string>& ids, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write id map: " + path.string());
  for (std::size_t d = 0; d < ids.size(); ++d) out << ids[d] << '\t' << d << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::string> load_id_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open id map: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + ": malformed id map line: " + line);
    const std::size_t index = std::stoull(line.substr(tab + 1));
    if (index != ids.size())
      throw DataError(path.string() + ": id map out of order at index " +
                      std::to_string(index));
    ids.push_back(line.substr(0, tab));
  }
  return ids;
}

// Reads a split file against the saved id maps, so dense indices are stable
// regardless of the order lines appear in.
InteractionTable load_with_maps(
    const fs::path& path, const std::vector<std::string>& user_ids,
    const std::vector<std::string>& item_ids,
    const std::unordered_map<std::string, Index>& user_index,
    const std::unordered_map<std::string, Index>& item_index) {
  InteractionTable table;
  table.num_users = static_cast<Index>(user_ids.size());
  table.num_items = static_cast<Index>(item_ids.size());
  table.user_ids = user_ids;
  table.item_ids = item_ids;

  std::ifstream in(path);
  if (!in) throw DataError("cannot open split file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed interaction line");
    const auto u = user_index.find(line.substr(0, tab));
    const auto i = item_index.find(line.substr(tab + 1));
    if (u == user_index.end() || i == item_index.end())
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": id not present in the saved id maps");
    table.pairs.emplace_back(u->second, i->second);
  }
  std::sort(table.pairs.begin(), table.pairs.end());
  return table;
}

struct Workspace {
  fs::path dir;
  std::map<std::string, std::string> manifest;
  SplitDataset split;
  std::vector<std::string> feature_modalities;
  std::vector<FeatureMatrix> features;
  std::string data_hash;

  const FeatureMatrix& features_for(const std::string& modality) const {
    for (std::size_t m = 0; m < feature_modalities.size(); ++m)
      if (feature_modalities[m] == modality) return features[m];
    throw ConfigError("no aligned features for modality '" + modality +
                      "'; re-run preprocess with data.features." + modality);
  }
};

Workspace load_workspace(const RunConfig& config) {
  Workspace ws;
  ws.dir = config.out_dir();
  const fs::path manifest_path = ws.dir / "manifest.txt";
  if (!fs::exists(manifest_path))
    throw DataError("no manifest at " + manifest_path.string() +
                    "; run preprocess first");
  ws.manifest = read_kv_file(manifest_path);
  ws.data_hash = ws.manifest.at("data_hash");

  const auto user_ids = load_id_map(ws.dir / ws.manifest.at("user_map"));
  const auto item_ids = load_id_map(ws.dir / ws.manifest.at("item_map"));
  std::unordered_map<std::string, Index> user_index, item_index;
  for (std::size_t d = 0; d < user_ids.size(); ++d)
    user_index[user_ids[d]] = static_cast<Index>(d);
  for (std::size_t d = 0; d < item_ids.size(); ++d)
    item_index[item_ids[d]] = static_cast<Index>(d);

  ws.split.seed = std::stoull(ws.manifest.at("seed"));
  ws.split.train = load_with_maps(ws.dir / ws.manifest.at("train_file"),
                                  user_ids, item_ids, user_index, item_index);
  ws.split.validation = load_with_maps(ws.dir / ws.manifest.at("valid_file"),
                                       user_ids, item_ids, user_index,
                                       item_index);
  ws.split.test = load_with_maps(ws.dir / ws.manifest.at("test_file"),
                                 user_ids, item_ids, user_index, item_index);

  for (const std::string modality : {"visual", "textual"}) {
    const auto it = ws.manifest.find("features_" + std::string(modality));
    if (it == ws.manifest.end()) continue;
    ws.feature_modalities.push_back(modality);
    ws.features.push_back(load_feature_matrix(
        (ws.dir / it->second).string(),
        static_cast<Index>(item_ids.size()), modality));
  }
  return ws;
}

// Graph cache file names inside the output directory.
constexpr const char* kBipartiteFile = "bipartite.graph";
constexpr const char* kUserGraphFile = "user_cooc.graph";
constexpr const char* kItemGraphFile = "item_semantic.graph";
std::string knn_file(const std::string& modality) {
  return "item_knn_" + modality + ".graph";
}

// The item graph a model propagates over: the combined semantic graph for
// two-modality configs, the single modality's kNN graph (weight 1) otherwise.
ItemSemanticGraph load_item_graph_for(const ModelConfig& model,
                                      const Workspace& ws) {
  if (model.multimodal())
    return load_item_graph((ws.dir / kItemGraphFile).string());
  return item_graph_from_single(
      load_item_knn_graph((ws.dir / knn_file(model.modalities[0])).string()));
}

GraphOperators<float> load_operators_for(const ModelConfig& model,
                                         const Workspace& ws) {
  const BipartiteGraph bipartite =
      load_bipartite_graph((ws.dir / kBipartiteFile).string());
  const UserCooccurrenceGraph user_graph =
      load_user_graph((ws.dir / kUserGraphFile).string());
  const ItemSemanticGraph item_graph = load_item_graph_for(model, ws);
  return make_graph_operators<float>(bipartite, user_graph, item_graph,
                                     model.item_graph_row_norm);
}

std::vector<MatrixXf> features_for_model(const ModelConfig& model,
                                         const Workspace& ws) {
  std::vector<MatrixXf> features;
  for (const auto& modality : model.modalities)
    features.push_back(ws.features_for(modality).data);
  return features;
}

MetricsReport evaluate_params(const ModelParams<float>& params,
                              const ModelConfig& model, const Workspace& ws,
                              const GraphOperators<float>& ops, SplitPart part,
                              bool mask_validation) {
  const std::vector<MatrixXf> features = features_for_model(model, ws);
  const ForwardState<float> state = forward(params, features, ops, model);
  return evaluate_representations(state.z_user, state.z_item, ws.split, part,
                                  {10, 20}, mask_validation);
}

json metrics_to_json(const MetricsReport& report, const RunConfig& config,
                     const std::string& part, const std::string& data_hash) {
  json j;
  for (int k : report.ks) {
    j["recall@" + std::to_string(k)] = report.recall.at(k);
    j["ndcg@" + std::to_string(k)] = report.ndcg.at(k);
  }
  j["users"] = report.num_evaluated_users;
  json echo = config_echo_json(config);
  echo["part"] = part;
  echo["data_hash"] = data_hash;
  j["config"] = echo;
  return j;
}

// ---------------------------------------------------------------------------
// commands

int cmd_preprocess(const RunConfig& config) {
  if (config.interactions_path().empty())
    throw ConfigError("data.interactions is not set");
  const fs::path out_dir = config.out_dir();
  DirLock lock(out_dir);

  std::uint64_t h = hash_file(config.interactions_path());
  std::vector<std::string> feature_modalities;
  for (const std::string modality : {"visual", "textual"}) {
    if (!config.features_path(modality).empty()) {
      feature_modalities.push_back(modality);
      h = fnv1a64("|", 1, h);
      h ^= hash_file(config.features_path(modality));
    }
  }
  const std::string data_hash = hash_hex(h);

  const InteractionTable raw = load_interactions(config.interactions_path());
  const InteractionTable filtered = kcore_filter(raw, config.kcore());
  const SplitDataset split = split_interactions(
      filtered, config.split_seed(), config.split_mode(), config.split_strict());

  // surviving item row -> original feature row, via external ids
  std::unordered_map<std::string, Index> raw_item_index;
  for (std::size_t d = 0; d < raw.item_ids.size(); ++d)
    raw_item_index[raw.item_ids[d]] = static_cast<Index>(d);
  std::vector<Index> original_rows;
  original_rows.reserve(static_cast<std::size_t>(filtered.num_items));
  for (const auto& id : filtered.item_ids)
    original_rows.push_back(raw_item_index.at(id));

  save_interactions(split.train, (out_dir / "train.tsv").string());
  save_interactions(split.validation, (out_dir / "valid.tsv").string());
  save_interactions(split.test, (out_dir / "test.tsv").string());
  save_id_map(filtered.user_ids, out_dir / "user_map.tsv");
  save_id_map(filtered.item_ids, out_dir / "item_map.tsv");

  std::vector<std::pair<std::string, std::string>> manifest = config_echo(config);
  manifest.emplace_back("data_hash", data_hash);
  manifest.emplace_back("interactions", std::to_string(filtered.num_pairs()));
  manifest.emplace_back("item_map", "item_map.tsv");
  manifest.emplace_back("items", std::to_string(filtered.num_items));
  manifest.emplace_back("kcore", std::to_string(config.kcore()));
  manifest.emplace_back("ratios", "8:1:1");
  manifest.emplace_back("seed", std::to_string(config.split_seed()));
  manifest.emplace_back("split_mode", config.get("split.mode"));
  manifest.emplace_back("test_file", "test.tsv");
  manifest.emplace_back("train_file", "train.tsv");
  manifest.emplace_back("user_map", "user_map.tsv");
  manifest.emplace_back("users", std::to_string(filtered.num_users));
  manifest.emplace_back("valid_file", "valid.tsv");

  for (const auto& modality : feature_modalities) {
    const FeatureMatrix raw_features = load_feature_matrix(
        config.features_path(modality), raw.num_items, modality);
    const FeatureMatrix aligned = select_feature_rows(raw_features, original_rows);
    const std::string name = "features_" + modality + ".fmat";
    save_feature_matrix(aligned, (out_dir / name).string());
    manifest.emplace_back("features_" + modality, name);
  }
  std::sort(manifest.begin(), manifest.end());
  write_kv_file(out_dir / "manifest.txt", "duorec split manifest", manifest);

  std::cout << "preprocess: " << filtered.num_users << " users, "
            << filtered.num_items << " items, " << filtered.num_pairs()
            << " interactions after " << config.kcore() << "-core"
            << " (train/valid/test = " << split.train.num_pairs() << "/"
            << split.validation.num_pairs() << "/" << split.test.num_pairs()
            << ")" << std::endl;
  return kExitOk;
}

int cmd_build_graphs(const RunConfig& config, bool force) {
  const Workspace ws = load_workspace(config);
  DirLock lock(ws.dir);

  std::vector<std::pair<std::string, std::string>> meta = config_echo(config);
  meta.emplace_back("alpha_visual", config.get("graph.alpha_visual"));
  meta.emplace_back("data_hash", ws.data_hash);
  meta.emplace_back("k_item", std::to_string(config.k_item()));
  meta.emplace_back("k_user", std::to_string(config.k_user()));
  meta.emplace_back("modalities",
                    modalities_to_string(ws.feature_modalities));
  std::sort(meta.begin(), meta.end());

  const fs::path meta_path = ws.dir / "graphs.meta";
  std::vector<fs::path> graph_files = {ws.dir / kBipartiteFile,
                                       ws.dir / kUserGraphFile,
                                       ws.dir / kItemGraphFile};
  for (const auto& modality : ws.feature_modalities)
    graph_files.push_back(ws.dir / knn_file(modality));

  if (fs::exists(meta_path) && !force) {
    const auto stored = read_kv_file(meta_path);
    bool files_present = true;
    for (const auto& f : graph_files) files_present &= fs::exists(f);
    bool fresh = files_present;
    for (const char* key : {"data_hash", "k_item", "k_user", "alpha_visual",
                            "modalities"}) {
      const auto it = stored.find(key);
      const auto want =
          std::find_if(meta.begin(), meta.end(),
                       [&](const auto& kv) { return kv.first == key; });
      fresh &= it != stored.end() && it->second == want->second;
    }
    if (fresh) {
      std::cout << "build-graphs: cache valid, skipping (use --force to rebuild)"
                << std::endl;
      return kExitOk;
    }
    throw DataError("graph cache at " + ws.dir.string() +
                    " is stale (inputs or parameters changed); "
                    "re-run with --force");
  }

  const BipartiteGraph bipartite = build_normalized_bipartite(ws.split.train);
  save_bipartite_graph(bipartite, (ws.dir / kBipartiteFile).string());

  const UserCooccurrenceGraph user_graph =
      build_user_cooccurrence(ws.split.train, config.k_user());
  save_user_graph(user_graph, (ws.dir / kUserGraphFile).string());

  std::vector<ItemKnnGraph> knn_graphs;
  for (std::size_t m = 0; m < ws.feature_modalities.size(); ++m) {
    knn_graphs.push_back(
        build_item_semantic_modality(ws.features[m], config.k_item()));
    save_item_knn_graph(knn_graphs.back(),
                        (ws.dir / knn_file(ws.feature_modalities[m])).string());
  }

  ItemSemanticGraph semantic;
  if (knn_graphs.size() == 2) {
    const double alpha_visual = config.alpha_visual();
    semantic = combine_item_graphs(knn_graphs, {alpha_visual, 1.0 - alpha_visual});
  } else if (knn_graphs.size() == 1) {
    semantic = item_graph_from_single(knn_graphs[0]);
  } else {
    throw DataError("no feature matrices available; cannot build item graphs");
  }
  save_item_graph(semantic, (ws.dir / kItemGraphFile).string());

  write_kv_file(meta_path, "duorec graph cache", meta);
  std::size_t nnz_items = 0;
  for (const auto& row : semantic.neighbors) nnz_items += row.size();
  std::cout << "build-graphs: bipartite " << bipartite.edges.size()
            << " edges, user graph k=" << config.k_user()
            << ", item graph " << nnz_items << " edges" << std::endl;
  return kExitOk;
}

int cmd_train(const RunConfig& config) {
  const Workspace ws = load_workspace(config);
  DirLock lock(ws.dir);
  const ModelConfig model = config.model();
  const TrainConfig train_config = config.training();
  const GraphOperators<float> ops = load_operators_for(model, ws);
  const std::vector<MatrixXf> features = features_for_model(model, ws);

  const TrainResult result =
      train(model, train_config, ws.split, ops, features);

  Checkpoint checkpoint;
  checkpoint.config = model;
  checkpoint.seed = config.seed();
  checkpoint.data_hash = ws.data_hash;
  checkpoint.num_users = ws.split.train.num_users;
  checkpoint.params = result.best_params;
  save_checkpoint(checkpoint, (ws.dir / "checkpoint.bin").string());

  {
    std::ofstream hist(ws.dir / "history.tsv", std::ios::binary);
    if (!hist) throw DataError("cannot write history.tsv");
    for (const auto& [k, v] : config_echo(config))
      hist << "# " << k << '=' << v << '\n';
    hist << "# data_hash=" << ws.data_hash << '\n';
    hist << "# best_epoch=" << result.best_epoch << '\n';
    char line[256];
    for (const auto& e : result.history) {
      std::snprintf(line, sizeof(line),
                    "%lld\t%.8g\t%.8g\t%.8g\t%.6f\t%.3f\n",
                    static_cast<long long>(e.epoch), e.loss, e.val_recall20,
                    e.val_ndcg20, e.alpha, e.elapsed_ms);
      hist << line;
    }
  }

  const MetricsReport val =
      evaluate_params(result.best_params, model, ws, ops,
                      SplitPart::kValidation, false);
  std::cout << metrics_to_json(val, config, "valid", ws.data_hash).dump(2)
            << std::endl;
  if (result.diverged) {
    std::cerr << "train: diverged (non-finite loss); kept last finite "
                 "checkpoint from epoch "
              << result.best_epoch << std::endl;
    return kExitDivergence;
  }
  std::cout << "train: best epoch " << result.best_epoch << " val recall@20 "
            << result.best_val_recall20 << std::endl;
  return kExitOk;
}

int cmd_evaluate(const RunConfig& config, const std::string& checkpoint_arg,
                 const std::string& part_arg) {
  const Workspace ws = load_workspace(config);
  DirLock lock(ws.dir);
  const std::string checkpoint_path =
      checkpoint_arg.empty() ? (ws.dir / "checkpoint.bin").string()
                             : checkpoint_arg;
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  if (checkpoint.data_hash != ws.data_hash) {
    throw ConfigError("checkpoint was trained on different data (hash " +
                      checkpoint.data_hash + " vs " + ws.data_hash + ")");
  }
  if (checkpoint.num_users != ws.split.train.num_users)
    throw ConfigError("checkpoint user count does not match the workspace");

  const SplitPart part = split_part_from_string(part_arg);
  const GraphOperators<float> ops = load_operators_for(checkpoint.config, ws);
  const MetricsReport report =
      evaluate_params(checkpoint.params, checkpoint.config, ws, ops, part,
                      config.mask_validation_at_test());

  const json j = metrics_to_json(report, config, to_string(part), ws.data_hash);
  const fs::path report_path = ws.dir / ("metrics_" + to_string(part) + ".json");
  std::ofstream out(report_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + report_path.string());
  out << j.dump(2) << '\n';
  std::cout << j.dump(2) << std::endl;
  return kExitOk;
}

int cmd_ablate(const RunConfig& config, const std::string& axis) {
  const Workspace ws = load_workspace(config);
  DirLock lock(ws.dir);

  std::vector<std::pair<std::string, std::string>> variants;  // key, value
  if (axis == "components") {
    for (const char* v : {"ui_only", "ui_plus_uu", "full"})
      variants.emplace_back("model.components", v);
  } else if (axis == "fusion") {
    for (const char* v :
         {"attentive_concat", "weighted_sum", "mean", "weighted_max"})
      variants.emplace_back("model.fusion", v);
  } else if (axis == "modality") {
    for (const char* v : {"visual", "textual", "both"})
      variants.emplace_back("model.modalities", v);
  } else {
    throw ConfigError("unknown ablation axis: " + axis +
                      " (expected components|fusion|modality)");
  }

  std::ostringstream table;
  table << "axis\tvariant\trecall@10\trecall@20\tndcg@10\tndcg@20\tseed\t"
           "data_hash\n";
  for (const auto& [key, value] : variants) {
    RunConfig variant = config;
    variant.set(key, value);
    const ModelConfig model = variant.model();
    const GraphOperators<float> ops = load_operators_for(model, ws);
    const std::vector<MatrixXf> features = features_for_model(model, ws);
    const TrainResult result =
        train(model, variant.training(), ws.split, ops, features);
    const MetricsReport val = evaluate_params(
        result.best_params, model, ws, ops, SplitPart::kValidation, false);
    char row[512];
    std::snprintf(row, sizeof(row),
                  "%s\t%s\t%.6f\t%.6f\t%.6f\t%.6f\t%llu\t%s\n", axis.c_str(),
                  value.c_str(), val.recall.at(10), val.recall.at(20),
                  val.ndcg.at(10), val.ndcg.at(20),
                  static_cast<unsigned long long>(config.seed()),
                  ws.data_hash.c_str());
    table << row;
  }

  const fs::path table_path = ws.dir / ("ablate_" + axis + ".tsv");
  std::ofstream out(table_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + table_path.string());
  for (const auto& [k, v] : config_echo(config)) out << "# " << k << '=' << v << '\n';
  out << "# data_hash=" << ws.data_hash << '\n';
  out << table.str();
  std::cout << table.str();
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config) {
  GradCheckOptions options;
  options.seed = config.seed();
  const GradCheckReport report = run_gradcheck(options);
  for (const auto& combo : report.combos) {
    std::printf("%s  components=%-10s fusion=%-16s modalities=%-14s "
                "coords=%lld max_err=%.3g\n",
                combo.passed() ? "PASS" : "FAIL", combo.components.c_str(),
                combo.fusion.c_str(), combo.modalities.c_str(),
                static_cast<long long>(combo.coords_checked), combo.max_error);
    for (const auto& issue : combo.issues) {
      std::printf("      param=%s coord=%lld analytic=%.9g numeric=%.9g "
                  "err=%.3g\n",
                  issue.param.c_str(), static_cast<long long>(issue.coord),
                  issue.analytic, issue.numeric, issue.error);
    }
  }
  const std::size_t failed =
      static_cast<std::size_t>(std::count_if(report.combos.begin(),
                                             report.combos.end(),
                                             [](const auto& c) {
                                               return !c.passed();
                                             }));
  std::printf("gradcheck: %zu/%zu combinations passed\n",
              report.combos.size() - failed, report.combos.size());
  return report.all_passed() ? kExitOk : kExitGradCheckFailure;
}

// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--set", args.overrides,
                  "override a config key (KEY=VALUE, repeatable)");
  cmd->add_option("--seed", args.seed, "master random seed");
  cmd->add_option("--out", args.out, "output/workspace directory");
  cmd->add_flag("--force", args.force, "rebuild cached artifacts");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config;
  if (!args.config_path.empty()) config.load_file(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) config.set("seed", std::to_string(*args.seed));
  if (!args.out.empty()) config.set("out", args.out);
  return config;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"duorec: graph-based multimodal recommender"};
  app.require_subcommand(1);

  CommonArgs preprocess_args, build_args, train_args, eval_args, ablate_args,
      gradcheck_args;
  std::string checkpoint_path, part = "test", axis;

  add_common_flags(
      app.add_subcommand("preprocess",
                         "k-core filter, split and align the raw data"),
      preprocess_args);
  add_common_flags(
      app.add_subcommand("build-graphs", "build and cache the three graphs"),
      build_args);
  add_common_flags(app.add_subcommand("train", "train and keep the best model"),
                   train_args);
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "rank and report Recall/NDCG");
  add_common_flags(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", checkpoint_path,
                       "checkpoint file (default <out>/checkpoint.bin)");
  eval_cmd->add_option("--part", part, "split part: train|valid|test");
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "controlled comparison along one axis");
  add_common_flags(ablate_cmd, ablate_args);
  ablate_cmd->add_option("--axis", axis, "components|fusion|modality")
      ->required();
  add_common_flags(app.add_subcommand(
                       "gradcheck",
                       "verify analytic gradients against finite differences"),
                   gradcheck_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (app.got_subcommand("preprocess"))
      return cmd_preprocess(resolve_config(preprocess_args));
    if (app.got_subcommand("build-graphs"))
      return cmd_build_graphs(resolve_config(build_args), build_args.force);
    if (app.got_subcommand("train"))
      return cmd_train(resolve_config(train_args));
    if (app.got_subcommand("evaluate"))
      return cmd_evaluate(resolve_config(eval_args), checkpoint_path, part);
    if (app.got_subcommand("ablate"))
      return cmd_ablate(resolve_config(ablate_args), axis);
    if (app.got_subcommand("gradcheck"))
      return cmd_gradcheck(resolve_config(gradcheck_args));
    throw ConfigError("no command given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return kExitDataError;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << std::endl;
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUnexpected;
  }
}

}  // namespace duorec
