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

#include <iosfwd>
#include <string>
#include <vector>

#include "duorec/types.hpp"

namespace duorec {

// Dense per-modality item feature matrix (rows follow item_index order).
struct FeatureMatrix {
  std::string modality;  // "visual" | "textual"
  MatrixXf data;         // num_items x dim

  Index rows() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

// FMAT binary format: "FMAT", u32 LE version (=1), u64 LE rows, u64 LE cols,
// then rows*cols f32 LE values row-major. Round-trips bit-exactly.
MatrixXf read_fmat(std::istream& in, const std::string& what);
void write_fmat(std::ostream& out, const MatrixXf& m, const std::string& what);

// Loads an FMAT file and validates row count and finiteness.
FeatureMatrix load_feature_matrix(const std::string& path, Index expected_items,
                                  const std::string& modality);
void save_feature_matrix(const FeatureMatrix& features, const std::string& path);

// Row subset in the given order (used to align features after k-core).
FeatureMatrix select_feature_rows(const FeatureMatrix& features,
                                  const std::vector<Index>& rows);

}  // namespace duorec
