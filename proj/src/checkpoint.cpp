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
#include "duorec/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "duorec/features.hpp"

namespace duorec {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::json;

json config_to_json(const Checkpoint& c) {
  return json{{"dim", c.config.dim},
              {"layers_bipartite", c.config.layers_bipartite},
              {"layers_user", c.config.layers_user},
              {"layers_item", c.config.layers_item},
              {"fusion", to_string(c.config.fusion)},
              {"components", to_string(c.config.components)},
              {"modalities", modalities_to_string(c.config.modalities)},
              {"item_graph_row_norm", c.config.item_graph_row_norm},
              {"seed", c.seed},
              {"data_hash", c.data_hash},
              {"num_users", c.num_users}};
}

void config_from_json(const json& j, Checkpoint& c) {
  c.config.dim = j.at("dim").get<Index>();
  c.config.layers_bipartite = j.at("layers_bipartite").get<Index>();
  c.config.layers_user = j.at("layers_user").get<Index>();
  c.config.layers_item = j.at("layers_item").get<Index>();
  c.config.fusion = fusion_mode_from_string(j.at("fusion").get<std::string>());
  c.config.components =
      component_mode_from_string(j.at("components").get<std::string>());
  c.config.modalities =
      modalities_from_string(j.at("modalities").get<std::string>());
  c.config.item_graph_row_norm = j.at("item_graph_row_norm").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.data_hash = j.at("data_hash").get<std::string>();
  c.num_users = j.at("num_users").get<Index>();
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);

  out.write(kMagic, 4);
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::string header = config_to_json(checkpoint).dump();
  const std::uint64_t header_len = header.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  const auto& p = checkpoint.params;
  for (std::size_t m = 0; m < p.user_embed.size(); ++m) {
    write_fmat(out, p.user_embed[m], path);
    write_fmat(out, p.proj_weight[m], path);
    write_fmat(out, MatrixXf(p.proj_bias[m].transpose()), path);
  }
  const float logit = p.fusion_logit;
  out.write(reinterpret_cast<const char*>(&logit), sizeof(logit));
  if (!out) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path + ": bad checkpoint magic");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kVersion)
    throw DataError(path + ": unsupported checkpoint version");
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
    throw DataError(path + ": truncated checkpoint header");

  Checkpoint checkpoint;
  try {
    config_from_json(nlohmann::json::parse(header), checkpoint);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed checkpoint header: " + e.what());
  }

  for (std::size_t m = 0; m < checkpoint.config.modalities.size(); ++m) {
    checkpoint.params.user_embed.push_back(read_fmat(in, path));
    checkpoint.params.proj_weight.push_back(read_fmat(in, path));
    MatrixXf bias = read_fmat(in, path);
    if (bias.rows() != 1)
      throw DataError(path + ": projection bias must be a row vector");
    checkpoint.params.proj_bias.push_back(bias.transpose());
  }
  float logit = 0.0f;
  if (!in.read(reinterpret_cast<char*>(&logit), sizeof(logit)))
    throw DataError(path + ": truncated checkpoint");
  checkpoint.params.fusion_logit = logit;
  return checkpoint;
}

}  // namespace duorec
