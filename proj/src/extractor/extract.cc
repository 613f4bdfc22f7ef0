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

#include <optional>

#include "verifkit/error.h"
#include "verifkit/extractor.h"
#include "verifkit/log.h"
#include "verifkit/parallel.h"

namespace verifkit {

Eigen::VectorXd EmbedFeatures(const ExtractorModel& model,
                              const FeatureMatrix& features) {
  return Forward(model, features).embedding;
}

ExtractionResult ExtractEmbeddings(const ExtractorModel& model,
                                   const Manifest& manifest,
                                   const std::string& features_dir, int jobs) {
  const auto& recordings = manifest.recordings();
  std::vector<std::optional<Eigen::VectorXd>> slots(recordings.size());
  std::vector<std::string> errors(recordings.size());
  ParallelFor(recordings.size(), jobs, [&](std::size_t i) {
    try {
      FeatureMatrix features =
          ReadMatrix(FeaturePath(features_dir, recordings[i].recording_id));
      slots[i] = EmbedFeatures(model, features);
    } catch (const DataError& e) {
      errors[i] = e.what();
    }
  });

  ExtractionResult result;
  std::size_t kept = 0;
  for (const auto& s : slots) kept += s.has_value();
  result.embeddings.values.resize(static_cast<Eigen::Index>(kept),
                                  model.embedding_dim());
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    if (!slots[i]) {
      LogMessage(LogLevel::kWarning, "extract")
          << "skipping " << recordings[i].recording_id << ": " << errors[i];
      result.skipped.push_back(recordings[i].recording_id);
      continue;
    }
    result.embeddings.ids.push_back(recordings[i].recording_id);
    result.embeddings.values.row(row++) = slots[i]->cast<float>().transpose();
  }
  return result;
}

}  // namespace verifkit
