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

#include <functional>
#include <string>
#include <vector>

#include "duorec/training.hpp"

namespace duorec {

// Analytic-vs-numeric gradient verification over every component x fusion x
// modality combination on a small seeded instance. The model is instantiated
// in double precision and compared against central finite differences of the
// batch loss.
struct GradCheckOptions {
  std::uint64_t seed = 42;
  Index num_users = 8;
  Index num_items = 12;
  Index dim = 4;
  Index dim_visual = 6;
  Index dim_textual = 5;
  Index batch_size = 6;
  double lambda = 0.02;
  double step = 1e-4;      // central-difference h
  double rel_tol = 1e-4;
  double abs_tol = 1e-6;   // applies where |gradient| < small_threshold
  double small_threshold = 1e-8;
};

struct GradCheckIssue {
  std::string param;  // e.g. "user_embed[textual]"
  Index coord;        // row-major flat index within the tensor
  double analytic;
  double numeric;
  double error;  // relative, or absolute in the small-gradient regime
};

struct GradCheckComboResult {
  std::string components;
  std::string fusion;
  std::string modalities;
  Index coords_checked = 0;
  double max_error = 0.0;
  std::vector<GradCheckIssue> issues;

  bool passed() const { return issues.empty(); }
  std::string name() const {
    return components + " / " + fusion + " / " + modalities;
  }
};

struct GradCheckReport {
  std::vector<GradCheckComboResult> combos;
  bool all_passed() const {
    for (const auto& c : combos)
      if (!c.passed()) return false;
    return true;
  }
};

// Test hook: mutates the analytic gradients before comparison so the harness
// itself can be exercised. Production callers pass nullptr.
using GradientPerturbation =
    std::function<void(Gradients<double>&, const std::string& combo)>;

GradCheckReport run_gradcheck(const GradCheckOptions& options,
                              const GradientPerturbation& perturb = nullptr);

}  // namespace duorec
