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

#ifndef VERIFKIT_PIPELINE_H_
#define VERIFKIT_PIPELINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "verifkit/config_file.h"

namespace verifkit {

struct PipelineEer {
  double eer = 0.0;  // fraction, not percent
  double threshold = 0.0;
  std::uint64_t targets = 0;
  std::uint64_t nontargets = 0;
};

struct PipelineResult {
  std::string report;
  std::uint64_t config_hash = 0;
  // "source", then "X1", "X2", "fused" when enabled.
  std::vector<std::string> systems;
  // Restriction row names in report order.
  std::vector<std::string> rows;
  // eer[system][row].
  std::map<std::string, std::map<std::string, PipelineEer>> eer;
  std::vector<double> final_train_accuracy;
};

// Effective settings: every key the pipeline reads, with defaults filled
// in. Throws UsageError on unknown keys or bad values.
KeyValueConfig ResolvePipelineConfig(const KeyValueConfig& config);

// Runs data preparation, extractor training, embedding extraction, the PLDA
// back-end, optional PLDA adaptation (X1) and extractor fine-tuning (X2),
// fusion, trial scoring and evaluation. Writes models, DET curves,
// breakdown tables and report.txt under out_dir. `jobs` and out_dir do not
// affect any output byte. Errors name the failing stage and keep their
// kind; files written before the failure are left in place.
PipelineResult RunPipeline(const KeyValueConfig& config, const std::string& out_dir,
                           int jobs);

}  // namespace verifkit

#endif  // VERIFKIT_PIPELINE_H_
