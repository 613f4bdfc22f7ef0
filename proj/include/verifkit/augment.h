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

#ifndef VERIFKIT_AUGMENT_H_
#define VERIFKIT_AUGMENT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verifkit/audio.h"
#include "verifkit/manifest.h"
#include "verifkit/rng.h"

namespace verifkit {

enum class AugmentKind { kBabble, kMusic, kNoise, kReverb };
inline constexpr int kNumAugmentKinds = 4;

std::string_view ToString(AugmentKind kind);
std::optional<AugmentKind> ParseAugmentKind(std::string_view token);

struct AugmentSpec {
  AugmentKind kind = AugmentKind::kNoise;
  double snr_db = 10.0;  // additive kinds
  double rt60 = 0.3;     // seconds, reverb only
  std::uint64_t rng_seed = 0;
};

// Babble sums at least three interferers, then scales the sum. Music and
// noise use the first interferer. Interferers are looped when shorter than
// the signal and cropped at a seeded offset when longer. The mix is scaled
// so that signal power / interference power equals snr_db.
//
// Reverb ignores interferers and convolves with a seeded white-noise impulse
// response under an exp(-ln(1000) t / rt60) envelope (60 dB amplitude decay
// after rt60 seconds), normalized to unit energy. Output grows by the
// response length minus one.
//
// The result is rescaled only if its peak exceeds 1. Throws DataError for
// missing interferers, zero-power input, non-finite snr_db, rt60 <= 0, or
// mismatched sample rates.
AudioSignal Augment(const AudioSignal& signal, const AugmentSpec& spec,
                    std::span<const AudioSignal> interferers);

// Ranges the per-recording specs are drawn from.
struct AugmentPolicy {
  double noise_snr_min = 0.0, noise_snr_max = 15.0;
  double music_snr_min = 5.0, music_snr_max = 15.0;
  double babble_snr_min = 13.0, babble_snr_max = 20.0;
  double rt60_min = 0.2, rt60_max = 0.8;
};

// Kind uniform over the four kinds; parameters uniform in the policy range.
AugmentSpec DrawAugmentSpec(Rng* rng, const AugmentPolicy& policy);

// Synthetic interference sources standing in for noise/music corpora.
AudioSignal MakeWhiteNoise(std::size_t num_samples, int sample_rate, Rng* rng);
AudioSignal MakeHum(std::size_t num_samples, int sample_rate, Rng* rng);

struct DoubledCorpus {
  Manifest manifest;
  // One message per recording that could not be augmented.
  std::vector<std::string> failures;
};

// Adds one augmented copy of every recording, id suffixed "-aug", same
// speaker and section, audio written under out_dir. Babble mixes three
// other recordings of the corpus. Per-recording failures are collected
// rather than thrown; that recording simply gets no copy.
DoubledCorpus DoubleCorpus(const Manifest& manifest, const AugmentPolicy& policy,
                           std::uint64_t seed, const std::string& out_dir);

}  // namespace verifkit

#endif  // VERIFKIT_AUGMENT_H_
