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

#include "verifkit/audio.h"

#include <charconv>
#include <cmath>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"

namespace verifkit {

void ValidateSignal(const AudioSignal& signal) {
  if (signal.sample_rate <= 0)
    throw DataError("audio: non-positive sample rate " +
                    std::to_string(signal.sample_rate));
  if (signal.samples.empty()) throw DataError("audio: empty signal");
  for (float s : signal.samples)
    if (!std::isfinite(s)) throw DataError("audio: non-finite sample");
}

RawAudioPath ParseRawAudioPath(const std::string& path_with_rate) {
  std::size_t at = path_with_rate.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 == path_with_rate.size())
    throw DataError("audio path \"" + path_with_rate +
                    "\" lacks an @<rate> suffix");
  RawAudioPath out;
  out.file = path_with_rate.substr(0, at);
  const char* begin = path_with_rate.data() + at + 1;
  const char* end = path_with_rate.data() + path_with_rate.size();
  auto [ptr, ec] = std::from_chars(begin, end, out.sample_rate);
  if (ec != std::errc() || ptr != end || out.sample_rate <= 0)
    throw DataError("audio path \"" + path_with_rate + "\": bad sample rate");
  return out;
}

std::string FormatRawAudioPath(const std::string& file, int sample_rate) {
  return file + "@" + std::to_string(sample_rate);
}

AudioSignal ReadRawAudio(const std::string& path_with_rate) {
  RawAudioPath path = ParseRawAudioPath(path_with_rate);
  std::string bytes = ReadFileBytes(path.file);
  if (bytes.size() % 4 != 0)
    throw DataError(path.file + ": size is not a multiple of 4 bytes");
  BinaryReader reader(bytes, path.file);
  AudioSignal signal;
  signal.sample_rate = path.sample_rate;
  signal.samples.resize(bytes.size() / 4);
  for (auto& s : signal.samples) s = reader.GetF32();
  ValidateSignal(signal);
  return signal;
}

void WriteRawAudio(const std::string& file, const AudioSignal& signal) {
  BinaryWriter writer;
  for (float s : signal.samples) writer.PutF32(s);
  WriteFileBytes(file, writer.buffer());
}

double SignalPower(const std::vector<float>& samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (float s : samples) sum += static_cast<double>(s) * s;
  return sum / static_cast<double>(samples.size());
}

}  // namespace verifkit
