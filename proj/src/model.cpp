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
#include "duorec/model.hpp"

#include <algorithm>
#include <sstream>

namespace duorec {

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "attentive_concat") return FusionMode::kAttentiveConcat;
  if (s == "weighted_sum") return FusionMode::kWeightedSum;
  if (s == "mean") return FusionMode::kMean;
  if (s == "weighted_max") return FusionMode::kWeightedMax;
  throw ConfigError("unknown fusion mode: " + s);
}

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kAttentiveConcat: return "attentive_concat";
    case FusionMode::kWeightedSum: return "weighted_sum";
    case FusionMode::kMean: return "mean";
    case FusionMode::kWeightedMax: return "weighted_max";
  }
  return "?";
}

ComponentMode component_mode_from_string(const std::string& s) {
  if (s == "ui_only") return ComponentMode::kUiOnly;
  if (s == "ui_plus_uu") return ComponentMode::kUiPlusUu;
  if (s == "full") return ComponentMode::kFull;
  throw ConfigError("unknown component mode: " + s);
}

std::string to_string(ComponentMode mode) {
  switch (mode) {
    case ComponentMode::kUiOnly: return "ui_only";
    case ComponentMode::kUiPlusUu: return "ui_plus_uu";
    case ComponentMode::kFull: return "full";
  }
  return "?";
}

std::vector<std::string> modalities_from_string(const std::string& s) {
  std::vector<std::string> parsed;
  std::istringstream stream(s);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (token == "both") {
      parsed = {"visual", "textual"};
      continue;
    }
    if (token != "visual" && token != "textual")
      throw ConfigError("unknown modality: " + token);
    parsed.push_back(token);
  }
  std::sort(parsed.begin(), parsed.end(), [](const auto& a, const auto& b) {
    return (a == "visual") > (b == "visual");  // visual first
  });
  parsed.erase(std::unique(parsed.begin(), parsed.end()), parsed.end());
  if (parsed.empty()) throw ConfigError("modality set must not be empty");
  return parsed;
}

std::string modalities_to_string(const std::vector<std::string>& modalities) {
  std::string out;
  for (const auto& m : modalities) {
    if (!out.empty()) out += ',';
    out += m;
  }
  return out;
}

}  // namespace duorec
