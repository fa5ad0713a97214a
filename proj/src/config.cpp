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
#include "duorec/config.hpp"

#include <fstream>

namespace duorec {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"data.interactions", ""},
      {"data.features.visual", ""},
      {"data.features.textual", ""},
      {"data.kcore", "5"},
      {"split.seed", ""},
      {"split.mode", "per_user"},
      {"split.strict", "false"},
      {"graph.k_user", "10"},
      {"graph.k_item", "10"},
      {"graph.alpha_visual", "0.1"},
      {"model.dim", "64"},
      {"model.layers_bipartite", "2"},
      {"model.layers_user", "1"},
      {"model.layers_item", "1"},
      {"model.fusion", "attentive_concat"},
      {"model.modalities", "visual,textual"},
      {"model.components", "full"},
      {"model.item_graph_row_norm", "false"},
      {"train.lr", "1e-4"},
      {"train.lambda", "1e-4"},
      {"train.batch_size", "2048"},
      {"train.max_epochs", "1000"},
      {"train.patience", "20"},
      {"train.reg_full", "false"},
      {"eval.mask_validation", "false"},
      {"seed", "42"},
      {"out", "out"},
  };
  return defaults;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

RunConfig::RunConfig() : values_(default_values()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string RunConfig::features_path(const std::string& modality) const {
  return get("data.features." + modality);
}

std::uint64_t RunConfig::split_seed() const {
  const std::string& raw = get("split.seed");
  return raw.empty() ? seed() : get_u64("split.seed");
}

SplitMode RunConfig::split_mode() const {
  const std::string& mode = get("split.mode");
  if (mode == "per_user") return SplitMode::kPerUser;
  if (mode == "global") return SplitMode::kGlobal;
  throw ConfigError("split.mode must be per_user or global, got " + mode);
}

ModelConfig RunConfig::model() const {
  ModelConfig config;
  config.dim = get_index("model.dim");
  config.layers_bipartite = get_index("model.layers_bipartite");
  config.layers_user = get_index("model.layers_user");
  config.layers_item = get_index("model.layers_item");
  config.fusion = fusion_mode_from_string(get("model.fusion"));
  config.components = component_mode_from_string(get("model.components"));
  config.modalities = modalities_from_string(get("model.modalities"));
  config.item_graph_row_norm = get_bool("model.item_graph_row_norm");
  if (config.dim < 1) throw ConfigError("model.dim must be >= 1");
  if (config.layers_bipartite < 1)
    throw ConfigError("model.layers_bipartite must be >= 1");
  if (config.layers_user < 0 || config.layers_item < 0)
    throw ConfigError("homogeneous layer counts must be >= 0");
  return config;
}

TrainConfig RunConfig::training() const {
  TrainConfig config;
  config.learning_rate = get_double("train.lr");
  config.reg_lambda = get_double("train.lambda");
  config.batch_size = get_index("train.batch_size");
  config.max_epochs = get_index("train.max_epochs");
  config.patience = get_index("train.patience");
  config.reg_full = get_bool("train.reg_full");
  config.seed = seed();
  if (config.learning_rate <= 0) throw ConfigError("train.lr must be positive");
  if (config.reg_lambda < 0) throw ConfigError("train.lambda must be >= 0");
  if (config.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (config.max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  if (config.patience < 1) throw ConfigError("train.patience must be >= 1");
  return config;
}

Index RunConfig::get_index(const std::string& key) const {
  try {
    return static_cast<Index>(std::stoll(get(key)));
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + get(key) + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" +
                      get(key) + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + get(key) + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& raw = get(key);
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + raw + "'");
}

}  // namespace duorec
