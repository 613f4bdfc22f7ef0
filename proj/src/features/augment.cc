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

#include "verifkit/augment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "verifkit/error.h"

namespace verifkit {

namespace {

// Interferer resampled in length to `length`: seeded crop when longer, loop
// when shorter.
std::vector<double> FitLength(const AudioSignal& source, std::size_t length,
                              Rng* rng) {
  const auto& s = source.samples;
  std::vector<double> out(length);
  std::size_t start = 0;
  if (s.size() > length) start = static_cast<std::size_t>(
                             rng->UniformInt(s.size() - length + 1));
  for (std::size_t i = 0; i < length; ++i)
    out[i] = s[(start + i) % s.size()];
  return out;
}

AudioSignal FinishMix(const std::vector<double>& mix, int sample_rate) {
  double peak = 0.0;
  for (double v : mix) peak = std::max(peak, std::abs(v));
  double scale = peak > 1.0 ? 1.0 / peak : 1.0;
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i)
    out.samples[i] = static_cast<float>(mix[i] * scale);
  return out;
}

AudioSignal Reverberate(const AudioSignal& signal, double rt60, Rng* rng) {
  const std::size_t length = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(rt60 * signal.sample_rate)));
  const double decay = std::log(1000.0) / (rt60 * signal.sample_rate);
  std::vector<double> response(length);
  double energy = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    response[n] = rng->Normal() * std::exp(-decay * static_cast<double>(n));
    energy += response[n] * response[n];
  }
  const double norm = 1.0 / std::sqrt(energy);
  for (double& h : response) h *= norm;

  const auto& x = signal.samples;
  std::vector<double> y(x.size() + length - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t n = 0; n < length; ++n) y[i + n] += xi * response[n];
  }
  return FinishMix(y, signal.sample_rate);
}

}  // namespace

std::string_view ToString(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kBabble:
      return "babble";
    case AugmentKind::kMusic:
      return "music";
    case AugmentKind::kNoise:
      return "noise";
    case AugmentKind::kReverb:
      return "reverb";
  }
  return "noise";
}

std::optional<AugmentKind> ParseAugmentKind(std::string_view token) {
  for (int k = 0; k < kNumAugmentKinds; ++k)
    if (ToString(static_cast<AugmentKind>(k)) == token)
      return static_cast<AugmentKind>(k);
  return std::nullopt;
}

AudioSignal Augment(const AudioSignal& signal, const AugmentSpec& spec,
                    std::span<const AudioSignal> interferers) {
  ValidateSignal(signal);
  const double signal_power = SignalPower(signal.samples);
  if (signal_power <= 0.0) throw DataError("augment: zero-power input signal");
  Rng rng(spec.rng_seed);

  if (spec.kind == AugmentKind::kReverb) {
    if (!(spec.rt60 > 0.0) || !std::isfinite(spec.rt60))
      throw DataError("augment: rt60 must be positive and finite");
    return Reverberate(signal, spec.rt60, &rng);
  }

  if (!std::isfinite(spec.snr_db))
    throw DataError("augment: snr_db must be finite");
  const std::size_t needed = spec.kind == AugmentKind::kBabble ? 3 : 1;
  if (interferers.size() < needed)
    throw DataError("augment: " + std::string(ToString(spec.kind)) + " needs " +
                    std::to_string(needed) + " interferer(s), got " +
                    std::to_string(interferers.size()));
  const std::size_t used =
      spec.kind == AugmentKind::kBabble ? interferers.size() : 1;

  const std::size_t length = signal.samples.size();
  std::vector<double> interference(length, 0.0);
  for (std::size_t k = 0; k < used; ++k) {
    const AudioSignal& source = interferers[k];
    ValidateSignal(source);
    if (source.sample_rate != signal.sample_rate)
      throw DataError("augment: interferer sample rate " +
                      std::to_string(source.sample_rate) + " != " +
                      std::to_string(signal.sample_rate));
    auto fitted = FitLength(source, length, &rng);
    for (std::size_t i = 0; i < length; ++i) interference[i] += fitted[i];
  }
  double interference_power = 0.0;
  for (double v : interference) interference_power += v * v;
  interference_power /= static_cast<double>(length);
  if (interference_power <= 0.0)
    throw DataError("augment: zero-power interference");

  const double gain = std::sqrt(signal_power /
                                (interference_power *
                                 std::pow(10.0, spec.snr_db / 10.0)));
  std::vector<double> mix(length);
  for (std::size_t i = 0; i < length; ++i)
    mix[i] = signal.samples[i] + gain * interference[i];
  return FinishMix(mix, signal.sample_rate);
}

AugmentSpec DrawAugmentSpec(Rng* rng, const AugmentPolicy& policy) {
  AugmentSpec spec;
  spec.kind = static_cast<AugmentKind>(rng->UniformInt(kNumAugmentKinds));
  switch (spec.kind) {
    case AugmentKind::kBabble:
      spec.snr_db = rng->Uniform(policy.babble_snr_min, policy.babble_snr_max);
      break;
    case AugmentKind::kMusic:
      spec.snr_db = rng->Uniform(policy.music_snr_min, policy.music_snr_max);
      break;
    case AugmentKind::kNoise:
      spec.snr_db = rng->Uniform(policy.noise_snr_min, policy.noise_snr_max);
      break;
    case AugmentKind::kReverb:
      spec.rt60 = rng->Uniform(policy.rt60_min, policy.rt60_max);
      break;
  }
  spec.rng_seed = rng->NextU64();
  return spec;
}

AudioSignal MakeWhiteNoise(std::size_t num_samples, int sample_rate, Rng* rng) {
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(num_samples);
  for (auto& s : out.samples) s = static_cast<float>(0.1 * rng->Normal());
  return out;
}

AudioSignal MakeHum(std::size_t num_samples, int sample_rate, Rng* rng) {
  // A few decaying harmonics of a random fundamental, slow amplitude wobble.
  const double f0 = rng->Uniform(80.0, 400.0);
  const double wobble = rng->Uniform(0.5, 3.0);
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    double t = static_cast<double>(i) / sample_rate;
    double v = 0.0;
    for (int h = 1; h <= 5; ++h) {
      double f = f0 * h;
      if (f >= 0.5 * sample_rate) break;
      v += std::sin(2.0 * std::numbers::pi * f * t) / h;
    }
    v *= 0.1 * (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * wobble * t));
    out.samples[i] = static_cast<float>(v);
  }
  return out;
}

DoubledCorpus DoubleCorpus(const Manifest& manifest, const AugmentPolicy& policy,
                           std::uint64_t seed, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto& recordings = manifest.recordings();
  std::vector<RecordingRecord> augmented;
  DoubledCorpus result;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const RecordingRecord& rec = recordings[i];
    try {
      Rng rng(Rng::DeriveSeed(seed, i));
      AugmentSpec spec = DrawAugmentSpec(&rng, policy);
      AudioSignal signal = ReadRawAudio(rec.source_path);
      std::vector<AudioSignal> interferers;
      switch (spec.kind) {
        case AugmentKind::kNoise:
          interferers.push_back(
              MakeWhiteNoise(signal.samples.size(), signal.sample_rate, &rng));
          break;
        case AugmentKind::kMusic:
          interferers.push_back(
              MakeHum(signal.samples.size(), signal.sample_rate, &rng));
          break;
        case AugmentKind::kBabble: {
          std::vector<std::size_t> others;
          for (std::size_t j = 0; j < recordings.size(); ++j)
            if (recordings[j].speaker_id != rec.speaker_id) others.push_back(j);
          if (others.size() < 3)
            throw DataError("babble needs recordings from other speakers");
          rng.Shuffle(std::span<std::size_t>(others));
          for (int k = 0; k < 3; ++k)
            interferers.push_back(ReadRawAudio(recordings[others[k]].source_path));
          break;
        }
        case AugmentKind::kReverb:
          break;
      }
      AudioSignal out = Augment(signal, spec, interferers);
      std::string file = (fs::path(out_dir) / (rec.recording_id + "-aug.f32")).string();
      WriteRawAudio(file, out);
      RecordingRecord copy = rec;
      copy.recording_id = rec.recording_id + "-aug";
      copy.source_path = FormatRawAudioPath(file, out.sample_rate);
      augmented.push_back(std::move(copy));
    } catch (const std::exception& e) {
      result.failures.push_back(rec.recording_id + ": " + e.what());
    }
  }
  std::vector<RecordingRecord> all = recordings;
  all.insert(all.end(), augmented.begin(), augmented.end());
  result.manifest = Manifest::Create(manifest.speakers(), std::move(all));
  return result;
}

}  // namespace verifkit
