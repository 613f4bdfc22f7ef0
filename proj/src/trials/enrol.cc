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

#include <filesystem>
#include <map>
#include <vector>

#include "verifkit/error.h"
#include "verifkit/log.h"
#include "verifkit/trials.h"

namespace verifkit {

Manifest ConcatenateSectionE(const Manifest& manifest,
                             const std::string& features_dir,
                             const std::string& out_features_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(features_dir))
    throw DataError("features directory " + features_dir + " does not exist");
  fs::create_directories(out_features_dir);
  const bool same_dir = fs::equivalent(features_dir, out_features_dir);
  std::map<std::string, std::vector<const RecordingRecord*>> section_e;
  std::vector<RecordingRecord> recordings;
  for (const auto& r : manifest.recordings()) {
    if (r.section == Section::kE)
      section_e[r.speaker_id].push_back(&r);
    else
      recordings.push_back(r);
  }
  for (const auto& [speaker_id, parts] : section_e) {
    const std::string joined_id = speaker_id + "-E";
    if (manifest.FindRecording(joined_id) &&
        !(parts.size() == 1 && parts[0]->recording_id == joined_id))
      throw DataError("cannot join section E of " + speaker_id + ": id " +
                      joined_id + " already exists");
    std::vector<FeatureMatrix> blocks;
    Eigen::Index rows = 0;
    for (const RecordingRecord* part : parts) {
      blocks.push_back(ReadMatrix(FeaturePath(features_dir, part->recording_id)));
      if (blocks.back().cols() != blocks.front().cols())
        throw DataError("section E features of " + speaker_id +
                        " differ in dimension");
      rows += blocks.back().rows();
    }
    FeatureMatrix joined(rows, blocks.front().cols());
    Eigen::Index at = 0;
    for (const auto& block : blocks) {
      joined.middleRows(at, block.rows()) = block;
      at += block.rows();
    }
    const std::string path = FeaturePath(out_features_dir, joined_id);
    WriteMatrix(path, joined);
    recordings.push_back({joined_id, speaker_id, Section::kE, path});
  }
  if (!same_dir) {
    for (const auto& r : recordings) {
      if (r.section == Section::kE) continue;
      const fs::path link = FeaturePath(out_features_dir, r.recording_id);
      const fs::path target = fs::absolute(FeaturePath(features_dir, r.recording_id));
      std::error_code ec;
      fs::remove(link, ec);
      fs::create_symlink(target, link, ec);
      if (ec)
        throw DataError("cannot link " + link.string() + ": " + ec.message());
    }
  }
  return Manifest::Create(manifest.speakers(), std::move(recordings));
}

EmbeddingMap PreprocessEmbeddings(const EmbeddingSet& embeddings,
                                  const PreprocessChain& chain) {
  if (embeddings.size() > 0 && embeddings.dim() != chain.input_dim())
    throw DataError("embedding dim " + std::to_string(embeddings.dim()) +
                    " does not match preprocess input dim " +
                    std::to_string(chain.input_dim()));
  EmbeddingMap out;
  out.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    out.emplace(embeddings.ids[i], chain.Apply(embeddings.RowAsDouble(i)));
  return out;
}

Enrolments BuildEnrolments(const Manifest& manifest,
                           const EmbeddingMap& embeddings) {
  std::map<std::string, std::vector<Eigen::VectorXd>> parts;
  for (const auto& r : manifest.recordings()) {
    if (!IsEnrolmentSection(r.section)) continue;
    auto it = embeddings.find(r.recording_id);
    if (it != embeddings.end()) parts[r.speaker_id].push_back(it->second);
  }
  Enrolments enrolments;
  for (const auto& s : manifest.speakers()) {
    auto it = parts.find(s.speaker_id);
    if (it == parts.end()) {
      enrolments.excluded.push_back(s.speaker_id);
      continue;
    }
    enrolments.by_speaker.emplace(s.speaker_id, AverageAndNormalize(it->second));
  }
  if (!enrolments.excluded.empty()) {
    std::string list;
    for (const auto& id : enrolments.excluded) list += (list.empty() ? "" : ",") + id;
    Log(LogLevel::kWarning, "enrol",
        std::to_string(enrolments.excluded.size()) +
            " speaker(s) without section A/B embeddings excluded: " + list);
  }
  return enrolments;
}

}  // namespace verifkit
