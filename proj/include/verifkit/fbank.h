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

#ifndef VERIFKIT_FBANK_H_
#define VERIFKIT_FBANK_H_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "verifkit/audio.h"
#include "verifkit/manifest.h"
#include "verifkit/matrix_io.h"

namespace verifkit {

struct FbankConfig {
  int num_filters = 40;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  // 0 selects the smallest power of two >= the frame length in samples.
  int fft_size = 0;
  double low_freq = 20.0;
  // 0 means Nyquist.
  double high_freq = 0.0;
  // Floor applied to mel energies before the log.
  double energy_floor = 1e-10;
  bool mean_normalize = true;
};

// Sample-domain framing resolved for one sample rate.
struct FrameGeometry {
  int frame_length = 0;
  int frame_shift = 0;
  int fft_size = 0;
  double low_freq = 0.0;
  double high_freq = 0.0;
};

// Throws DataError on an invalid configuration for this sample rate.
FrameGeometry ResolveGeometry(const FbankConfig& config, int sample_rate);

// 1 + floor((num_samples - frame_length) / frame_shift), or 0 when the
// signal is shorter than one frame.
int NumFrames(std::size_t num_samples, const FrameGeometry& geometry);

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// num_filters x (fft_size / 2 + 1) triangular weights, triangles spaced
// evenly on the mel scale between the cutoffs.
Eigen::MatrixXd MelFilterbank(const FbankConfig& config, int sample_rate);

// Log mel filterbank energies, Hamming-windowed frames, per-utterance mean
// removed per coefficient when config.mean_normalize is set. Throws
// DataError if the signal is shorter than one frame.
FeatureMatrix ExtractFbank(const AudioSignal& signal, const FbankConfig& config);

struct FeatureBatchResult {
  std::size_t written = 0;
  // "recording_id: reason" for every recording that failed.
  std::vector<std::string> failures;
};

// Fbank features of every manifest recording (raw audio at its source path)
// to out_dir/<recording_id>.svm, parallel over recordings. Per-recording
// failures are collected, not thrown.
FeatureBatchResult ExtractCorpusFeatures(const Manifest& manifest,
                                         const FbankConfig& config,
                                         const std::string& out_dir, int jobs);

}  // namespace verifkit

#endif  // VERIFKIT_FBANK_H_
