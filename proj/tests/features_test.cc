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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numbers>

#include "test_util.h"
#include "verifkit/audio.h"
#include "verifkit/augment.h"
#include "verifkit/error.h"
#include "verifkit/fbank.h"
#include "verifkit/manifest.h"
#include "verifkit/matrix_io.h"
#include "verifkit/rng.h"

namespace verifkit {
namespace {

using testing::TempDir;

AudioSignal Tone(double hz, double seconds, int rate) {
  AudioSignal s;
  s.sample_rate = rate;
  s.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    s.samples[i] = static_cast<float>(
        0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate));
  return s;
}

AudioSignal Noise(std::size_t n, int rate, std::uint64_t seed) {
  Rng rng(seed);
  return MakeWhiteNoise(n, rate, &rng);
}

TEST(FbankTest, SilenceIsFloorThenZero) {
  AudioSignal silence;
  silence.sample_rate = 16000;
  silence.samples.assign(16000, 0.0f);
  FbankConfig raw;
  raw.mean_normalize = false;
  FeatureMatrix before = ExtractFbank(silence, raw);
  for (Eigen::Index i = 0; i < before.size(); ++i)
    EXPECT_FLOAT_EQ(before.data()[i], static_cast<float>(std::log(1e-10)));
  FeatureMatrix after = ExtractFbank(silence, FbankConfig{});
  EXPECT_EQ(after.cols(), 40);
  EXPECT_EQ(after.cwiseAbs().maxCoeff(), 0.0f);
}

TEST(FbankTest, FramingArithmetic) {
  AudioSignal s = Noise(8000, 8000, 1);
  FeatureMatrix f = ExtractFbank(s, FbankConfig{});
  EXPECT_EQ(f.rows(), 98);
  EXPECT_EQ(f.cols(), 40);
  // One sample short of the second frame.
  AudioSignal t = Noise(200 + 79, 8000, 2);
  EXPECT_EQ(ExtractFbank(t, FbankConfig{}).rows(), 1);
}

TEST(FbankTest, ShorterThanOneFrameFails) {
  AudioSignal s = Noise(199, 8000, 3);
  EXPECT_THROW(ExtractFbank(s, FbankConfig{}), DataError);
}

TEST(FbankTest, ToneLandsInContainingMelBin) {
  const int rate = 16000;
  FbankConfig cfg;
  cfg.mean_normalize = false;
  FeatureMatrix f = ExtractFbank(Tone(440.0, 1.0, rate), cfg);
  Eigen::Index best = 0;
  f.row(f.rows() / 2).maxCoeff(&best);
  // Triangle edges from the natural-log mel form, equally spaced in mel.
  auto mel = [](double hz) { return 1127.0 * std::log1p(hz / 700.0); };
  auto hz = [](double m) { return 700.0 * std::expm1(m / 1127.0); };
  const double lo = mel(20.0), hi = mel(rate / 2.0);
  const double step = (hi - lo) / (cfg.num_filters + 1);
  const double left = hz(lo + step * static_cast<double>(best));
  const double right = hz(lo + step * static_cast<double>(best + 2));
  EXPECT_LT(left, 440.0);
  EXPECT_GT(right, 440.0);
}

TEST(FbankTest, ShiftCovariantAtFrameGranularity) {
  const int rate = 16000;
  AudioSignal s = Noise(rate / 2, rate, 7);
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    s.samples[i] += static_cast<float>(0.3 * std::sin(0.05 * static_cast<double>(i)));
  AudioSignal padded = s;
  padded.samples.insert(padded.samples.begin(), 160, 0.0f);
  FeatureMatrix a = ExtractFbank(s, FbankConfig{});
  FeatureMatrix b = ExtractFbank(padded, FbankConfig{});
  ASSERT_EQ(b.rows(), a.rows() + 1);
  Eigen::MatrixXd common_a = a.cast<double>();
  Eigen::MatrixXd common_b = b.bottomRows(a.rows()).cast<double>();
  common_a.rowwise() -= common_a.colwise().mean();
  common_b.rowwise() -= common_b.colwise().mean();
  EXPECT_LE((common_a - common_b).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(FbankTest, DeterministicAndFinite) {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    AudioSignal s;
    s.sample_rate = trial % 2 ? 8000 : 16000;
    s.samples.resize(400 + rng.UniformInt(4000));
    for (auto& v : s.samples)
      v = static_cast<float>(rng.Uniform(-1.0, 1.0) * (rng.UniformInt(10) ? 1.0 : 0.0));
    FeatureMatrix a = ExtractFbank(s, FbankConfig{});
    FeatureMatrix b = ExtractFbank(s, FbankConfig{});
    EXPECT_TRUE(a.allFinite());
    EXPECT_EQ(EncodeMatrix(a), EncodeMatrix(b));
  }
}

TEST(FbankTest, RejectsBadConfig) {
  AudioSignal s = Noise(16000, 16000, 1);
  FbankConfig cfg;
  cfg.frame_shift_ms = 30.0;
  EXPECT_THROW(ExtractFbank(s, cfg), Error);
  cfg = FbankConfig{};
  cfg.high_freq = 9000.0;
  EXPECT_THROW(ExtractFbank(s, cfg), Error);
}

TEST(AugmentTest, InfiniteSnrRejected) {
  AudioSignal s = Noise(1000, 16000, 1);
  AudioSignal n = Noise(1000, 16000, 2);
  AugmentSpec spec;
  spec.kind = AugmentKind::kNoise;
  spec.snr_db = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Augment(s, spec, std::span(&n, 1)), DataError);
}

TEST(AugmentTest, ZeroDbDoublesPower) {
  const std::size_t n = 200000;
  AudioSignal s = Noise(n, 16000, 21);
  AudioSignal noise = Noise(n, 16000, 22);
  AugmentSpec spec;
  spec.kind = AugmentKind::kNoise;
  spec.snr_db = 0.0;
  spec.rng_seed = 5;
  AudioSignal out = Augment(s, spec, std::span(&noise, 1));
  ASSERT_EQ(out.samples.size(), n);
  double ps = 0.0, po = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ps += static_cast<double>(s.samples[i]) * s.samples[i];
    po += static_cast<double>(out.samples[i]) * out.samples[i];
  }
  EXPECT_NEAR(po / ps, 2.0, 0.02);
}

TEST(AugmentTest, SameSeedBitwiseIdentical) {
  AudioSignal s = Noise(4000, 16000, 1);
  std::vector<AudioSignal> others = {Noise(3000, 16000, 2), Noise(5000, 16000, 3),
                                     Noise(4000, 16000, 4)};
  for (AugmentKind kind : {AugmentKind::kBabble, AugmentKind::kMusic,
                           AugmentKind::kNoise, AugmentKind::kReverb}) {
    AugmentSpec spec;
    spec.kind = kind;
    spec.rng_seed = 99;
    AudioSignal a = Augment(s, spec, others);
    AudioSignal b = Augment(s, spec, others);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    EXPECT_EQ(0, std::memcmp(a.samples.data(), b.samples.data(),
                             a.samples.size() * sizeof(float)));
    float peak = 0.0f;
    for (float v : a.samples) peak = std::max(peak, std::abs(v));
    EXPECT_LE(peak, 1.0f);
  }
}

TEST(AugmentTest, LengthContracts) {
  AudioSignal s = Noise(4000, 16000, 1);
  AudioSignal n = Noise(100, 16000, 2);
  AugmentSpec spec;
  spec.kind = AugmentKind::kMusic;
  EXPECT_EQ(Augment(s, spec, std::span(&n, 1)).samples.size(), 4000u);
  spec.kind = AugmentKind::kReverb;
  spec.rt60 = 0.25;
  EXPECT_EQ(Augment(s, spec, {}).samples.size(), 4000u + 4000u - 1u);
  spec.rt60 = 0.0;
  EXPECT_THROW(Augment(s, spec, {}), DataError);
}

TEST(AugmentTest, MissingInterferersAndSilentInput) {
  AudioSignal s = Noise(4000, 16000, 1);
  std::vector<AudioSignal> two = {Noise(4000, 16000, 2), Noise(4000, 16000, 3)};
  AugmentSpec spec;
  spec.kind = AugmentKind::kBabble;
  EXPECT_THROW(Augment(s, spec, two), DataError);
  spec.kind = AugmentKind::kNoise;
  EXPECT_THROW(Augment(s, spec, {}), DataError);
  AudioSignal silent;
  silent.samples.assign(1000, 0.0f);
  EXPECT_THROW(Augment(silent, spec, two), DataError);
}

TEST(AugmentTest, KindsUniformWithinThreeSigma) {
  Rng rng(2026);
  int counts[kNumAugmentKinds] = {};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<int>(DrawAugmentSpec(&rng, {}).kind)];
  const double p = 1.0 / kNumAugmentKinds;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int c : counts) EXPECT_LE(std::abs(c - draws * p), 3 * sigma);
}

TEST(AugmentTest, DrawnSpecsRespectPolicy) {
  Rng rng(3);
  AugmentPolicy policy;
  for (int i = 0; i < 2000; ++i) {
    AugmentSpec spec = DrawAugmentSpec(&rng, policy);
    switch (spec.kind) {
      case AugmentKind::kNoise:
        EXPECT_GE(spec.snr_db, policy.noise_snr_min);
        EXPECT_LE(spec.snr_db, policy.noise_snr_max);
        break;
      case AugmentKind::kReverb:
        EXPECT_GE(spec.rt60, policy.rt60_min);
        EXPECT_LE(spec.rt60, policy.rt60_max);
        break;
      default:
        EXPECT_TRUE(std::isfinite(spec.snr_db));
    }
  }
}

Manifest WriteAudioCorpus(const TempDir& dir, int speakers) {
  std::vector<SpeakerRecord> spk;
  std::vector<RecordingRecord> recs;
  for (int i = 0; i < speakers; ++i) {
    SpeakerRecord s{"s" + std::to_string(i), i % 2 ? Gender::kFemale : Gender::kMale,
                    "Thai", Grade::kB1};
    std::string file = dir / (s.speaker_id + ".f32");
    WriteRawAudio(file, Noise(3200, 16000, 40 + i));
    recs.push_back({s.speaker_id + "-C0", s.speaker_id, Section::kC,
                    FormatRawAudioPath(file, 16000)});
    spk.push_back(s);
  }
  return Manifest::Create(spk, recs);
}

TEST(DoubleCorpusTest, CountsAndLabels) {
  TempDir dir;
  Manifest m = WriteAudioCorpus(dir, 5);
  DoubledCorpus doubled = DoubleCorpus(m, {}, 17, dir / "aug");
  EXPECT_TRUE(doubled.failures.empty());
  ASSERT_EQ(doubled.manifest.recordings().size(), 10u);
  int suffixed = 0;
  for (const auto& r : doubled.manifest.recordings()) {
    if (r.recording_id.ends_with("-aug")) {
      ++suffixed;
      const auto* orig = m.FindRecording(
          r.recording_id.substr(0, r.recording_id.size() - 4));
      ASSERT_NE(orig, nullptr);
      EXPECT_EQ(r.speaker_id, orig->speaker_id);
      EXPECT_EQ(r.section, orig->section);
      EXPECT_FALSE(ReadRawAudio(r.source_path).samples.empty());
    }
  }
  EXPECT_EQ(suffixed, 5);
}

TEST(DoubleCorpusTest, UnreadableRecordingIsCollected) {
  TempDir dir;
  Manifest m = WriteAudioCorpus(dir, 4);
  std::vector<RecordingRecord> recs = m.recordings();
  recs[0].source_path = dir / "missing.f32@16000";
  Manifest broken = Manifest::Create(m.speakers(), recs);
  DoubledCorpus doubled = DoubleCorpus(broken, {}, 17, dir / "aug");
  ASSERT_FALSE(doubled.failures.empty());
  EXPECT_NE(doubled.failures[0].find(recs[0].recording_id), std::string::npos);
  EXPECT_GE(doubled.manifest.recordings().size(), 4u);
}

TEST(CorpusFeaturesTest, WritesOneFilePerRecording) {
  TempDir dir;
  Manifest m = WriteAudioCorpus(dir, 3);
  FeatureBatchResult r = ExtractCorpusFeatures(m, FbankConfig{}, dir / "feats", 2);
  EXPECT_EQ(r.written, 3u);
  EXPECT_TRUE(r.failures.empty());
  for (const auto& rec : m.recordings()) {
    FeatureMatrix f = ReadMatrix(FeaturePath(dir / "feats", rec.recording_id));
    EXPECT_EQ(f.rows(), 18);
    EXPECT_EQ(f.cols(), 40);
  }
}

}  // namespace
}  // namespace verifkit
