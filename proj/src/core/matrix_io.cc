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

#include "verifkit/matrix_io.h"

#include <cmath>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"

namespace verifkit {

namespace {

void PutBody(BinaryWriter* writer, const FeatureMatrix& matrix) {
  writer->PutU32(static_cast<std::uint32_t>(matrix.rows()));
  writer->PutU32(static_cast<std::uint32_t>(matrix.cols()));
  const float* data = matrix.data();
  for (Eigen::Index i = 0; i < matrix.size(); ++i) writer->PutF32(data[i]);
}

FeatureMatrix GetBody(BinaryReader* reader, bool allow_empty) {
  std::uint32_t rows = reader->GetU32();
  std::uint32_t cols = reader->GetU32();
  if (!allow_empty && (rows == 0 || cols == 0))
    throw DataError(reader->context() + ": empty matrix");
  std::size_t count = static_cast<std::size_t>(rows) * cols;
  reader->Require(count * 4, "matrix payload");
  FeatureMatrix matrix(rows, cols);
  float* data = matrix.data();
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = reader->GetF32();
    if (!std::isfinite(data[i]))
      throw DataError(reader->context() + ": non-finite value at row " +
                      std::to_string(i / cols) + ", col " +
                      std::to_string(i % cols));
  }
  return matrix;
}

}  // namespace

std::string EncodeMatrix(const FeatureMatrix& matrix) {
  BinaryWriter writer;
  writer.PutMagic("SVM1");
  PutBody(&writer, matrix);
  return writer.Release();
}

FeatureMatrix DecodeMatrix(std::string_view bytes, const std::string& context) {
  BinaryReader reader(bytes, context);
  reader.ExpectMagic("SVM1");
  FeatureMatrix matrix = GetBody(&reader, false);
  if (!reader.AtEnd())
    throw DataError(context + ": " + std::to_string(reader.remaining()) +
                    " trailing bytes");
  return matrix;
}

FeatureMatrix ReadMatrix(const std::string& path) {
  return DecodeMatrix(ReadFileBytes(path), path);
}

void WriteMatrix(const std::string& path, const FeatureMatrix& matrix) {
  WriteFileBytes(path, EncodeMatrix(matrix));
}

std::optional<std::size_t> EmbeddingSet::Find(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return i;
  return std::nullopt;
}

std::string EncodeEmbeddings(const EmbeddingSet& set) {
  if (static_cast<std::size_t>(set.values.rows()) != set.ids.size())
    throw DataError("embedding set: " + std::to_string(set.ids.size()) +
                    " ids for " + std::to_string(set.values.rows()) + " rows");
  BinaryWriter writer;
  writer.PutMagic("SVE1");
  PutBody(&writer, set.values);
  for (const auto& id : set.ids) writer.PutString(id);
  return writer.Release();
}

EmbeddingSet DecodeEmbeddings(std::string_view bytes,
                              const std::string& context) {
  BinaryReader reader(bytes, context);
  reader.ExpectMagic("SVE1");
  EmbeddingSet set;
  set.values = GetBody(&reader, true);
  set.ids.reserve(set.values.rows());
  for (Eigen::Index i = 0; i < set.values.rows(); ++i)
    set.ids.push_back(reader.GetString());
  if (!reader.AtEnd())
    throw DataError(context + ": " + std::to_string(reader.remaining()) +
                    " trailing bytes");
  return set;
}

EmbeddingSet ReadEmbeddings(const std::string& path) {
  return DecodeEmbeddings(ReadFileBytes(path), path);
}

void WriteEmbeddings(const std::string& path, const EmbeddingSet& set) {
  WriteFileBytes(path, EncodeEmbeddings(set));
}

std::string FeaturePath(const std::string& features_dir,
                        const std::string& recording_id) {
  return features_dir + "/" + recording_id + ".svm";
}

}  // namespace verifkit
