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

#include <string>

#include "duorec/model.hpp"
#include "duorec/training.hpp"

namespace duorec {

// Checkpoint file: "DCKP", u32 LE version, u64 LE header length, JSON header
// echoing the model config / seed / data hash, then per modality the user
// embedding, projection weight and projection bias tensors each as an
// embedded FMAT record, and finally the fusion logit as one f32.
// Round-trips bit-exactly.
struct Checkpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::string data_hash;
  Index num_users = 0;
  ModelParams<float> params;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace duorec
