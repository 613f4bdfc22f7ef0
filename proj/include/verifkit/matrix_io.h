// Copyright (c) 2026 The verifkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VERIFKIT_MATRIX_IO_H_
#define VERIFKIT_MATRIX_IO_H_

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace verifkit {

// Frame-level features: T rows (frames) by D columns, row-major float32.
using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// "SVM1", u32 rows, u32 cols, rows*cols float32, all little-endian.
std::string EncodeMatrix(const FeatureMatrix& matrix);
// Throws DataError on bad magic, truncation, trailing bytes, an empty
// matrix, or non-finite values.
FeatureMatrix DecodeMatrix(std::string_view bytes,
                           const std::string& context = "matrix");

FeatureMatrix ReadMatrix(const std::string& path);
void WriteMatrix(const std::string& path, const FeatureMatrix& matrix);

// Feature file location convention shared by every stage.
std::string FeaturePath(const std::string& features_dir,
                        const std::string& recording_id);

// A collection of equal-dimension embeddings keyed by recording or speaker
// id. Row i of `values` belongs to ids[i].
struct EmbeddingSet {
  std::vector<std::string> ids;
  FeatureMatrix values;

  std::size_t size() const { return ids.size(); }
  int dim() const { return static_cast<int>(values.cols()); }
  // Linear scan; callers with many lookups should build their own index.
  std::optional<std::size_t> Find(std::string_view id) const;
  Eigen::VectorXd RowAsDouble(std::size_t row) const {
    return values.row(static_cast<Eigen::Index>(row)).cast<double>().transpose();
  }
};

// "SVE1" with the SVM1 layout, then one length-prefixed id per row.
std::string EncodeEmbeddings(const EmbeddingSet& set);
EmbeddingSet DecodeEmbeddings(std::string_view bytes,
                              const std::string& context = "embeddings");

EmbeddingSet ReadEmbeddings(const std::string& path);
void WriteEmbeddings(const std::string& path, const EmbeddingSet& set);

}  // namespace verifkit

#endif  // VERIFKIT_MATRIX_IO_H_
