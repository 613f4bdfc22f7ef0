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

#ifndef VERIFKIT_EXTRACTOR_H_
#define VERIFKIT_EXTRACTOR_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "verifkit/extractor_model.h"
#include "verifkit/manifest.h"
#include "verifkit/matrix_io.h"

namespace verifkit {

inline constexpr double kStatsPoolEpsilon = 1e-10;

// [mean; stddev] over the rows of `frames`. The standard deviation is
// sqrt(max(E[h^2] - mean^2, epsilon)) with population (1/T) normalization.
// Throws DataError for zero rows.
Eigen::VectorXd StatsPool(const Eigen::Ref<const Eigen::MatrixXd>& frames,
                          double epsilon = kStatsPoolEpsilon);

struct ForwardOutput {
  Eigen::VectorXd logits;
  Eigen::VectorXd embedding;
};

// Frames without full context are dropped at every frame layer. Throws
// DataError if the feature dim is wrong or there are fewer than
// model.MinFrames() frames.
ForwardOutput Forward(const ExtractorModel& model,
                      const Eigen::MatrixXd& features);
ForwardOutput Forward(const ExtractorModel& model, const FeatureMatrix& features);

// Mean over rows of -log softmax(logits)[label]. Labels are 0-based; throws
// DataError when any label is outside [0, logits.cols()).
double CrossEntropy(const Eigen::Ref<const Eigen::MatrixXd>& logits,
                    std::span<const int> labels);

// Batch-mean cross-entropy of the model on `segments` and its gradient with
// respect to every parameter, accumulated (+=) into `gradient`, which must
// have the model's shapes. `num_correct`, if given, receives the number of
// segments whose argmax logit equals the label.
double LossAndGradient(const ExtractorModel& model,
                       std::span<const Eigen::MatrixXd> segments,
                       std::span<const int> labels, ExtractorModel* gradient,
                       int* num_correct = nullptr);

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int minibatch_size = 64;
  // Crops shorter recordings are looped to this length.
  int segment_frames = 200;
  int epochs = 1;
  // Random crops drawn from every recording per epoch.
  int crops_per_recording = 1;
  std::uint64_t seed = 0;

  // Throws UsageError unless every field is positive (epochs may be 0).
  void Validate() const;
};

struct TrainingExample {
  std::string recording_id;
  Eigen::MatrixXd features;
  int label = 0;
};

struct TrainingSet {
  // Label i is speaker_ids[i]; ids sorted.
  std::vector<std::string> speaker_ids;
  std::vector<TrainingExample> examples;
};

// One example per manifest recording, features read from
// features_dir/<recording_id>.svm. Labels follow sorted speaker ids.
TrainingSet LoadTrainingSet(const Manifest& manifest,
                            const std::string& features_dir);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  ExtractorModel model;
  std::vector<EpochStats> log;
};

// Minibatch SGD with momentum on random fixed-length crops. Single-threaded
// and deterministic given config.seed. Throws DataError with fewer than two
// speakers, a speaker without examples, or a head whose size differs from
// the number of speakers; NumericalError (with epoch, batch and per-layer
// weight norms) on a non-finite loss.
TrainResult Train(ExtractorModel model, const TrainingSet& data,
                  const TrainConfig& config);

// Replaces the head with a fresh data.speaker_ids.size()-way head seeded by
// head_seed, then trains every layer.
TrainResult FineTune(ExtractorModel model, const TrainingSet& data,
                     const TrainConfig& config, std::uint64_t head_seed);

// "epoch<TAB>loss<TAB>accuracy" lines.
std::string FormatLossLog(const std::vector<EpochStats>& log);

struct ExtractionResult {
  EmbeddingSet embeddings;
  // Recordings too short for the context span, or unreadable.
  std::vector<std::string> skipped;
};

Eigen::VectorXd EmbedFeatures(const ExtractorModel& model,
                              const FeatureMatrix& features);

// One embedding per manifest recording, id = recording_id, in manifest
// order. Parallel over recordings; output independent of `jobs`.
ExtractionResult ExtractEmbeddings(const ExtractorModel& model,
                                   const Manifest& manifest,
                                   const std::string& features_dir, int jobs);

}  // namespace verifkit

#endif  // VERIFKIT_EXTRACTOR_H_
