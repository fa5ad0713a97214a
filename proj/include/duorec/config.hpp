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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "duorec/interactions.hpp"
#include "duorec/model.hpp"
#include "duorec/training.hpp"

namespace duorec {

// Flat key=value configuration. Every key has a default; unknown keys are
// rejected. Precedence: command-line flag > config file > default.
class RunConfig {
 public:
  RunConfig();

  // Throws ConfigError for keys outside the registry.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  // Parses "key=value" lines; '#' starts a comment.
  void load_file(const std::string& path);

  // Fully resolved view, sorted by key.
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string interactions_path() const { return get("data.interactions"); }
  std::string features_path(const std::string& modality) const;
  Index kcore() const { return get_index("data.kcore"); }
  std::uint64_t seed() const { return get_u64("seed"); }
  std::uint64_t split_seed() const;  // split.seed, inheriting seed when empty
  SplitMode split_mode() const;
  bool split_strict() const { return get_bool("split.strict"); }
  std::string out_dir() const { return get("out"); }

  Index k_user() const { return get_index("graph.k_user"); }
  Index k_item() const { return get_index("graph.k_item"); }
  double alpha_visual() const { return get_double("graph.alpha_visual"); }

  ModelConfig model() const;
  TrainConfig training() const;
  bool mask_validation_at_test() const { return get_bool("eval.mask_validation"); }

 private:
  Index get_index(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

}  // namespace duorec
