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

#include <cmath>
#include <map>
#include <sstream>

#include "verifkit/error.h"
#include "verifkit/extractor.h"
#include "verifkit/log.h"
#include "verifkit/rng.h"

namespace verifkit {

namespace {

// Fixed-length crop starting at a random frame; short inputs are looped.
Eigen::MatrixXd Crop(const Eigen::MatrixXd& features, int length, Rng* rng) {
  const Eigen::Index rows = features.rows();
  if (rows >= length) {
    Eigen::Index start = static_cast<Eigen::Index>(
        rng->UniformInt(static_cast<std::uint64_t>(rows - length + 1)));
    return features.middleRows(start, length);
  }
  Eigen::MatrixXd out(length, features.cols());
  for (Eigen::Index t = 0; t < length; ++t) out.row(t) = features.row(t % rows);
  return out;
}

std::string LayerNorms(const ExtractorModel& model) {
  std::ostringstream out;
  for (std::size_t i = 0; i < model.frame_layers.size(); ++i)
    out << " frame" << i << "=" << model.frame_layers[i].weight.norm();
  for (std::size_t i = 0; i < model.segment_layers.size(); ++i)
    out << " segment" << i << "=" << model.segment_layers[i].weight.norm();
  out << " head=" << model.head.weight.norm();
  return out.str();
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("train: learning_rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw UsageError("train: momentum must be in [0, 1)");
  if (minibatch_size < 1) throw UsageError("train: minibatch_size must be >= 1");
  if (segment_frames < 1) throw UsageError("train: segment_frames must be >= 1");
  if (epochs < 0) throw UsageError("train: epochs must be >= 0");
  if (crops_per_recording < 1)
    throw UsageError("train: crops_per_recording must be >= 1");
}

TrainingSet LoadTrainingSet(const Manifest& manifest,
                            const std::string& features_dir) {
  TrainingSet set;
  std::map<std::string, int> label_of;
  for (const auto& s : manifest.speakers()) {
    label_of[s.speaker_id] = static_cast<int>(set.speaker_ids.size());
    set.speaker_ids.push_back(s.speaker_id);
  }
  for (const auto& r : manifest.recordings()) {
    TrainingExample example;
    example.recording_id = r.recording_id;
    example.features = ReadMatrix(FeaturePath(features_dir, r.recording_id)).cast<double>();
    example.label = label_of.at(r.speaker_id);
    set.examples.push_back(std::move(example));
  }
  return set;
}

TrainResult Train(ExtractorModel model, const TrainingSet& data,
                  const TrainConfig& config) {
  config.Validate();
  model.Validate();
  const int num_speakers = static_cast<int>(data.speaker_ids.size());
  if (num_speakers < 2)
    throw DataError("train: need at least 2 speakers, got " +
                    std::to_string(num_speakers));
  if (model.num_speakers() != num_speakers)
    throw DataError("train: model head has " +
                    std::to_string(model.num_speakers()) + " outputs for " +
                    std::to_string(num_speakers) + " speakers");
  std::vector<int> per_speaker(num_speakers, 0);
  for (const auto& ex : data.examples) {
    if (ex.label < 0 || ex.label >= num_speakers)
      throw DataError("train: label out of range for " + ex.recording_id);
    if (ex.features.cols() != model.input_dim())
      throw DataError("train: feature dim mismatch for " + ex.recording_id);
    ++per_speaker[ex.label];
  }
  for (int s = 0; s < num_speakers; ++s)
    if (per_speaker[s] == 0)
      throw DataError("train: speaker " + data.speaker_ids[s] +
                      " has no recordings");
  if (config.segment_frames < model.MinFrames())
    throw UsageError("train: segment_frames " +
                     std::to_string(config.segment_frames) +
                     " below the context span minimum " +
                     std::to_string(model.MinFrames()));

  TrainResult result;
  ExtractorModel velocity = model.ZerosLike();
  ExtractorModel gradient = model.ZerosLike();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < data.examples.size(); ++i)
    for (int c = 0; c < config.crops_per_recording; ++c) order.push_back(i);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(Rng::DeriveSeed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    int correct_sum = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.minibatch_size), ++batch_index) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.minibatch_size));
      std::vector<Eigen::MatrixXd> segments;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        const TrainingExample& ex = data.examples[order[i]];
        segments.push_back(Crop(ex.features, config.segment_frames, &rng));
        labels.push_back(ex.label);
      }
      for (auto p : gradient.Parameters()) std::fill(p.begin(), p.end(), 0.0);
      int correct = 0;
      const double loss =
          LossAndGradient(model, segments, labels, &gradient, &correct);
      if (!std::isfinite(loss))
        throw NumericalError("train: non-finite loss at epoch " +
                             std::to_string(epoch + 1) + ", batch " +
                             std::to_string(batch_index) + "; weight norms:" +
                             LayerNorms(model));
      loss_sum += loss * static_cast<double>(end - start);
      correct_sum += correct;
      auto params = model.Parameters();
      auto vel = velocity.Parameters();
      auto grads = gradient.Parameters();
      for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].size(); ++i) {
          vel[t][i] = config.momentum * vel[t][i] -
                      config.learning_rate * grads[t][i];
          params[t][i] += vel[t][i];
        }
      }
    }
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss = loss_sum / static_cast<double>(order.size());
    stats.accuracy =
        static_cast<double>(correct_sum) / static_cast<double>(order.size());
    result.log.push_back(stats);
    LogMessage(LogLevel::kDebug, "extractor")
        << "epoch " << epoch + 1 << " loss " << stats.loss << " accuracy "
        << stats.accuracy;
  }
  result.model = std::move(model);
  return result;
}

TrainResult FineTune(ExtractorModel model, const TrainingSet& data,
                     const TrainConfig& config, std::uint64_t head_seed) {
  ReinitializeHead(&model, static_cast<int>(data.speaker_ids.size()), head_seed);
  return Train(std::move(model), data, config);
}

std::string FormatLossLog(const std::vector<EpochStats>& log) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& e : log)
    out << e.epoch << '\t' << e.loss << '\t' << e.accuracy << '\n';
  return out.str();
}

}  // namespace verifkit
