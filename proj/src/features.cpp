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
#include "duorec/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace duorec {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "big-endian hosts need byte swaps here");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw DataError(what + ": truncated FMAT data");
  return value;
}

}  // namespace

MatrixXf read_fmat(std::istream& in, const std::string& what) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(what + ": bad FMAT magic");
  const auto version = read_le<std::uint32_t>(in, what);
  if (version != kVersion)
    throw DataError(what + ": unsupported FMAT version " +
                    std::to_string(version));
  const auto rows = read_le<std::uint64_t>(in, what);
  const auto cols = read_le<std::uint64_t>(in, what);

  MatrixXf m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::vector<float> row(cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (!in.read(reinterpret_cast<char*>(row.data()),
                 static_cast<std::streamsize>(cols * sizeof(float))))
      throw DataError(what + ": truncated FMAT payload at row " +
                      std::to_string(r));
    for (std::uint64_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
  }
  return m;
}

void write_fmat(std::ostream& out, const MatrixXf& m, const std::string& what) {
  out.write(kMagic, 4);
  write_le(out, kVersion);
  write_le(out, static_cast<std::uint64_t>(m.rows()));
  write_le(out, static_cast<std::uint64_t>(m.cols()));
  std::vector<float> row(static_cast<std::size_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw DataError(what + ": FMAT write failed");
}

FeatureMatrix load_feature_matrix(const std::string& path, Index expected_items,
                                  const std::string& modality) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file: " + path);
  FeatureMatrix features;
  features.modality = modality;
  features.data = read_fmat(in, path);
  if (features.rows() != expected_items) {
    throw DataError(path + ": has " + std::to_string(features.rows()) +
                    " rows but the interaction table has " +
                    std::to_string(expected_items) + " items");
  }
  for (Index r = 0; r < features.rows(); ++r) {
    for (Index c = 0; c < features.dim(); ++c) {
      if (!std::isfinite(features.data(r, c))) {
        throw DataError(path + ": non-finite value at row " +
                        std::to_string(r) + ", col " + std::to_string(c));
      }
    }
  }
  return features;
}

void save_feature_matrix(const FeatureMatrix& features,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file: " + path);
  write_fmat(out, features.data, path);
}

FeatureMatrix select_feature_rows(const FeatureMatrix& features,
                                  const std::vector<Index>& rows) {
  FeatureMatrix out;
  out.modality = features.modality;
  out.data.resize(static_cast<Index>(rows.size()), features.dim());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.data.row(static_cast<Index>(r)) = features.data.row(rows[r]);
  return out;
}

}  // namespace duorec
