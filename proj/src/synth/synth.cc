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

#include "verifkit/synth.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "verifkit/error.h"
#include "verifkit/matrix_io.h"

namespace verifkit {
namespace {

std::string NumberedId(const std::string& prefix, int index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%04d", index);
  return prefix + buffer;
}

Eigen::VectorXd GaussianVector(int dim, Rng* rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng->Normal();
  return v;
}

Eigen::VectorXd UnitDirection(int dim, Rng* rng) {
  while (true) {
    Eigen::VectorXd v = GaussianVector(dim, rng);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

std::vector<double> ParseNumbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string token = text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw UsageError(what + ": bad number \"" + token + "\"");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void CheckCovariance(const Eigen::MatrixXd& m, int dim, bool definite,
                     const char* name) {
  if (m.rows() != dim || m.cols() != dim)
    throw UsageError(std::string("synth: ") + name + " must be " +
                     std::to_string(dim) + "x" + std::to_string(dim));
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw NumericalError(std::string("synth: ") + name + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double floor = -1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  const double least = eig.eigenvalues().minCoeff();
  if (definite ? !(least > 0.0) : least < floor)
    throw NumericalError(std::string("synth: ") + name + " is not " +
                         (definite ? "positive definite" : "PSD"));
}

}  // namespace

Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& psd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psd);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd RandomCovariance(int dim, double condition, double scale, Rng* rng) {
  if (dim < 1 || !(condition >= 1.0) || !(scale > 0.0))
    throw UsageError("random covariance needs dim >= 1, condition >= 1, scale > 0");
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng->Normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix for a Haar-distributed rotation.
  for (int i = 0; i < dim; ++i)
    if (qr.matrixQR()(i, i) < 0) q.col(i) = -q.col(i);
  Eigen::VectorXd values(dim);
  for (int i = 0; i < dim; ++i)
    values(i) = scale * std::exp(std::log(condition) * rng->Uniform());
  Eigen::MatrixXd m = q * values.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd ParseCovarianceSpec(const std::string& spec, int dim, Rng* rng) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "diag") {
    std::vector<double> v = ParseNumbers(args, "covariance " + spec);
    if (v.size() == 1) return v[0] * Eigen::MatrixXd::Identity(dim, dim);
    if (static_cast<int>(v.size()) != dim)
      throw UsageError("covariance " + spec + ": expected 1 or " +
                       std::to_string(dim) + " values");
    return Eigen::Map<Eigen::VectorXd>(v.data(), dim).asDiagonal();
  }
  if (kind == "random") {
    std::string joined = args;
    for (char& c : joined)
      if (c == ':') c = ',';
    std::vector<double> v = ParseNumbers(joined, "covariance " + spec);
    if (v.empty() || v.size() > 2)
      throw UsageError("covariance " + spec + ": expected random:condition[:scale]");
    return RandomCovariance(dim, v[0], v.size() == 2 ? v[1] : 1.0, rng);
  }
  throw UsageError("unknown covariance spec \"" + spec + "\"");
}

void SynthPldaConfig::Validate() const {
  if (dim < 1 || num_speakers < 1 || embeddings_per_speaker < 1)
    throw UsageError("synth plda: dim, num_speakers, embeddings_per_speaker must be >= 1");
  if (mean.size() != 0 && mean.size() != dim)
    throw UsageError("synth plda: mean has wrong dimension");
  CheckCovariance(between, dim, false, "between");
  CheckCovariance(within, dim, true, "within");
}

SynthPldaConfig SynthPldaConfig::FromConfig(const KeyValueConfig& config) {
  SynthPldaConfig c;
  c.dim = static_cast<int>(config.GetInt("dim", c.dim));
  c.num_speakers = static_cast<int>(config.GetInt("num_speakers", c.num_speakers));
  c.embeddings_per_speaker = static_cast<int>(
      config.GetInt("embeddings_per_speaker", c.embeddings_per_speaker));
  c.seed = config.GetUint("seed", c.seed);
  if (c.dim < 1) throw UsageError("synth plda: dim must be >= 1");
  // Random covariance specs draw from their own stream.
  Rng rng(Rng::DeriveSeed(c.seed, 0x636f76));
  c.between = ParseCovarianceSpec(config.GetString("between", "diag:2"), c.dim, &rng);
  c.within = ParseCovarianceSpec(config.GetString("within", "diag:1"), c.dim, &rng);
  std::vector<double> mean =
      ParseNumbers(config.GetString("mean", "0"), "synth plda mean");
  if (mean.size() == 1)
    c.mean = Eigen::VectorXd::Constant(c.dim, mean[0]);
  else
    c.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  c.Validate();
  return c;
}

PldaSample SamplePlda(const SynthPldaConfig& config) {
  config.Validate();
  const int d = config.dim;
  const Eigen::MatrixXd between_root = SymmetricSqrt(config.between);
  const Eigen::MatrixXd within_root = SymmetricSqrt(config.within);
  const Eigen::VectorXd mean =
      config.mean.size() == 0 ? Eigen::VectorXd::Zero(d) : config.mean;
  Rng rng(config.seed);
  const int n = config.num_speakers * config.embeddings_per_speaker;
  PldaSample sample;
  sample.rows.resize(n, d);
  sample.speaker_factors.resize(config.num_speakers, d);
  int row = 0;
  for (int s = 0; s < config.num_speakers; ++s) {
    const std::string speaker = NumberedId("spk", s + 1);
    const Eigen::VectorXd y = between_root * GaussianVector(d, &rng);
    sample.speaker_factors.row(s) = y.transpose();
    for (int k = 0; k < config.embeddings_per_speaker; ++k, ++row) {
      sample.rows.row(row) = (mean + y + within_root * GaussianVector(d, &rng)).transpose();
      sample.labels.push_back(speaker);
      sample.ids.push_back(NumberedId(speaker + "-e", k + 1));
    }
  }
  return sample;
}

void WritePldaSample(const PldaSample& sample, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  EmbeddingSet set;
  set.ids = sample.ids;
  set.values = sample.rows.cast<float>();
  const std::string embeddings_path = out_dir + "/embeddings.sve";
  WriteEmbeddings(embeddings_path, set);

  SynthCorpusConfig metadata;
  std::vector<std::string> speaker_ids;
  for (const auto& label : sample.labels)
    if (speaker_ids.empty() || speaker_ids.back() != label) speaker_ids.push_back(label);
  metadata.num_speakers = static_cast<int>(speaker_ids.size());
  std::vector<SpeakerRecord> speakers = RoundRobinSpeakers(metadata);
  for (std::size_t i = 0; i < speakers.size(); ++i) speakers[i].speaker_id = speaker_ids[i];
  std::vector<RecordingRecord> recordings;
  for (std::size_t i = 0; i < sample.ids.size(); ++i)
    recordings.push_back({sample.ids[i], sample.labels[i], Section::kA, embeddings_path});
  WriteManifest(out_dir + "/manifest.tsv",
                Manifest::Create(std::move(speakers), std::move(recordings)));
}

void SynthCorpusConfig::Validate() const {
  if (num_speakers < 1) throw UsageError("synth corpus: num_speakers must be >= 1");
  int total = 0;
  for (int n : recordings_per_section) {
    if (n < 0) throw UsageError("synth corpus: section counts must be >= 0");
    total += n;
  }
  if (total < 1) throw UsageError("synth corpus: need at least one recording per speaker");
  if (frames_per_recording < 1 || feature_dim < 1)
    throw UsageError("synth corpus: frames and feature_dim must be >= 1");
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw UsageError("synth corpus: rho must be finite and >= 0");
  if (!(domain_shift >= 0.0) || !std::isfinite(domain_shift))
    throw UsageError("synth corpus: domain_shift must be finite and >= 0");
  if (speaker_prefix.empty() ||
      speaker_prefix.find_first_of(" \t\n/") != std::string::npos)
    throw UsageError("synth corpus: bad speaker_prefix");
  if (genders.empty() || l1_pool.empty() || grade_pool.empty())
    throw UsageError("synth corpus: metadata pools must be non-empty");
}

SynthCorpusConfig SynthCorpusConfig::FromConfig(const KeyValueConfig& config) {
  SynthCorpusConfig c;
  c.num_speakers = static_cast<int>(config.GetInt("num_speakers", c.num_speakers));
  if (config.Has("sections")) {
    std::vector<std::string> counts = config.GetList("sections", {});
    if (counts.size() != 5)
      throw UsageError("synth corpus: sections needs five counts (A,B,C,D,E)");
    for (int i = 0; i < 5; ++i) {
      std::vector<double> v = ParseNumbers(counts[i], "sections");
      c.recordings_per_section[i] = static_cast<int>(v[0]);
      if (v[0] != c.recordings_per_section[i])
        throw UsageError("synth corpus: section counts must be integers");
    }
  }
  c.frames_per_recording = static_cast<int>(config.GetInt("frames", c.frames_per_recording));
  c.feature_dim = static_cast<int>(config.GetInt("feature_dim", c.feature_dim));
  c.rho = config.GetDouble("rho", c.rho);
  c.domain_shift = config.GetDouble("domain_shift", c.domain_shift);
  c.shift_seed = config.GetUint("shift_seed", c.shift_seed);
  c.speaker_prefix = config.GetString("speaker_prefix", c.speaker_prefix);
  if (config.Has("genders")) {
    c.genders.clear();
    for (const auto& token : config.GetList("genders", {})) {
      auto g = ParseGender(token);
      if (!g) throw UsageError("synth corpus: bad gender \"" + token + "\"");
      c.genders.push_back(*g);
    }
  }
  c.l1_pool = config.GetList("l1_pool", c.l1_pool);
  if (config.Has("grade_pool")) {
    c.grade_pool.clear();
    for (const auto& token : config.GetList("grade_pool", {})) {
      auto g = ParseGrade(token);
      if (!g) throw UsageError("synth corpus: bad grade \"" + token + "\"");
      c.grade_pool.push_back(*g);
    }
  }
  c.seed = config.GetUint("seed", c.seed);
  c.Validate();
  return c;
}

std::vector<SpeakerRecord> RoundRobinSpeakers(const SynthCorpusConfig& config) {
  std::vector<SpeakerRecord> speakers;
  for (int i = 0; i < config.num_speakers; ++i) {
    SpeakerRecord s;
    s.speaker_id = NumberedId(config.speaker_prefix, i + 1);
    s.gender = config.genders[i % config.genders.size()];
    s.l1 = config.l1_pool[i % config.l1_pool.size()];
    s.grade = config.grade_pool[i % config.grade_pool.size()];
    speakers.push_back(std::move(s));
  }
  return speakers;
}

Eigen::VectorXd DomainShiftVector(const SynthCorpusConfig& config) {
  if (config.domain_shift == 0.0) return Eigen::VectorXd::Zero(config.feature_dim);
  Rng rng(config.shift_seed);
  return config.domain_shift * UnitDirection(config.feature_dim, &rng);
}

Manifest SampleCorpus(const SynthCorpusConfig& config, const std::string& out_dir) {
  config.Validate();
  const std::string features_dir = out_dir + "/features";
  std::filesystem::create_directories(features_dir);
  const Eigen::VectorXd shift = DomainShiftVector(config);
  const int d = config.feature_dim;
  std::vector<SpeakerRecord> speakers = RoundRobinSpeakers(config);
  std::vector<RecordingRecord> recordings;
  static constexpr char kSections[] = "ABCDE";
  for (int s = 0; s < config.num_speakers; ++s) {
    Rng rng(Rng::DeriveSeed(config.seed, static_cast<std::uint64_t>(s)));
    const Eigen::VectorXd centre = config.rho * UnitDirection(d, &rng) + shift;
    for (int section = 0; section < 5; ++section) {
      for (int k = 0; k < config.recordings_per_section[section]; ++k) {
        const std::string id = speakers[s].speaker_id + "-" + kSections[section] +
                               std::to_string(k + 1);
        FeatureMatrix frames(config.frames_per_recording, d);
        for (int t = 0; t < config.frames_per_recording; ++t)
          for (int j = 0; j < d; ++j)
            frames(t, j) = static_cast<float>(centre(j) + rng.Normal());
        const std::string path = FeaturePath(features_dir, id);
        WriteMatrix(path, frames);
        recordings.push_back({id, speakers[s].speaker_id, static_cast<Section>(section), path});
      }
    }
  }
  Manifest manifest = Manifest::Create(std::move(speakers), std::move(recordings));
  WriteManifest(out_dir + "/manifest.tsv", manifest);
  return manifest;
}

}  // namespace verifkit
