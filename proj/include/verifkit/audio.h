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

#ifndef VERIFKIT_AUDIO_H_
#define VERIFKIT_AUDIO_H_

#include <string>
#include <vector>

namespace verifkit {

struct AudioSignal {
  int sample_rate = 16000;
  std::vector<float> samples;
};

// Throws DataError on an empty signal, non-positive rate, or non-finite
// samples.
void ValidateSignal(const AudioSignal& signal);

// Raw audio is headerless little-endian float32 mono. Manifest paths carry
// the sample rate as a suffix: "audio/r1.f32@16000".
struct RawAudioPath {
  std::string file;
  int sample_rate = 0;
};
RawAudioPath ParseRawAudioPath(const std::string& path_with_rate);
std::string FormatRawAudioPath(const std::string& file, int sample_rate);

AudioSignal ReadRawAudio(const std::string& path_with_rate);
// Writes samples to `file`; the sample rate lives in the manifest path.
void WriteRawAudio(const std::string& file, const AudioSignal& signal);

double SignalPower(const std::vector<float>& samples);

}  // namespace verifkit

#endif  // VERIFKIT_AUDIO_H_
