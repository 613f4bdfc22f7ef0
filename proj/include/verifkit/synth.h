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

#ifndef VERIFKIT_SYNTH_H_
#define VERIFKIT_SYNTH_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "verifkit/config_file.h"
#include "verifkit/manifest.h"
#include "verifkit/rng.h"

namespace verifkit {

// Symmetric square root of a PSD matrix (eigendecomposition; tiny negative
// eigenvalues clamp to zero).
Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& psd);

// Random SPD matrix: Haar-random rotation of eigenvalues spread
// log-uniformly over [scale, scale * condition].
Eigen::MatrixXd RandomCovariance(int dim, double condition, double scale, Rng* rng);

// Covariance from a spec string: "diag:v" (v * I), "diag:v1,...,vd", or
// "random:condition[:scale]". Throws UsageError on malformed specs.
Eigen::MatrixXd ParseCovarianceSpec(const std::string& spec, int dim, Rng* rng);

struct SynthPldaConfig {
  int dim = 4;
  int num_speakers = 500;
  int embeddings_per_speaker = 10;
  Eigen::VectorXd mean;     // empty means zero
  Eigen::MatrixXd between;  // Gamma
  Eigen::MatrixXd within;   // Lambda
  std::uint64_t seed = 0;

  // Throws UsageError on bad counts or shapes, NumericalError when between is
  // not PSD or within is not PD.
  void Validate() const;
  // Keys: dim, num_speakers, embeddings_per_speaker, mean (scalar or list),
  // between, within (covariance specs), seed.
  static SynthPldaConfig FromConfig(const KeyValueConfig& config);
};

struct PldaSample {
  Eigen::MatrixXd rows;             // one embedding per row
  std::vector<std::string> labels;  // speaker id per row
  std::vector<std::string> ids;     // embedding id per row
  Eigen::MatrixXd speaker_factors;  // one y per speaker
};

// y_s ~ N(0, Gamma) per speaker, e = mu + y_s + z with z ~ N(0, Lambda).
PldaSample SamplePlda(const SynthPldaConfig& config);

// Writes embeddings.sve and a manifest.tsv that labels every embedding id
// (section A, round-robin metadata).
void WritePldaSample(const PldaSample& sample, const std::string& out_dir);

struct SynthCorpusConfig {
  int num_speakers = 20;
  // Recordings per speaker in sections A..E.
  std::array<int, 5> recordings_per_section = {1, 1, 1, 1, 1};
  int frames_per_recording = 200;
  int feature_dim = 24;
  // Norm of each speaker's archetype vector; frames add unit Gaussian noise.
  double rho = 10.0;
  // Norm of the shift added to every frame; the direction depends only on
  // shift_seed, so corpora from one domain share it.
  double domain_shift = 0.0;
  std::uint64_t shift_seed = 1;
  std::string speaker_prefix = "spk";
  std::vector<Gender> genders = {Gender::kMale, Gender::kFemale};
  std::vector<std::string> l1_pool = {"L1a", "L1b", "L1c"};
  std::vector<Grade> grade_pool = {Grade::kA1, Grade::kA2, Grade::kB1,
                                   Grade::kB2, Grade::kC1};
  std::uint64_t seed = 0;

  void Validate() const;
  // Keys: num_speakers, sections (five counts), frames, feature_dim, rho,
  // domain_shift, shift_seed, speaker_prefix, genders, l1_pool, grade_pool,
  // seed.
  static SynthCorpusConfig FromConfig(const KeyValueConfig& config);
};

// Speaker i takes pool[i % pool size] for each of gender, L1 and grade.
std::vector<SpeakerRecord> RoundRobinSpeakers(const SynthCorpusConfig& config);

Eigen::VectorXd DomainShiftVector(const SynthCorpusConfig& config);

// Writes out_dir/manifest.tsv and out_dir/features/<recording_id>.svm and
// returns the manifest.
Manifest SampleCorpus(const SynthCorpusConfig& config, const std::string& out_dir);

}  // namespace verifkit

#endif  // VERIFKIT_SYNTH_H_
