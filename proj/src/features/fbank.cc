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

#include "verifkit/fbank.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <vector>

#include "verifkit/error.h"
#include "verifkit/log.h"
#include "verifkit/parallel.h"

namespace verifkit {

namespace {

// In-place iterative radix-2 FFT; data.size() must be a power of two.
void Fft(std::vector<std::complex<double>>* data) {
  const std::size_t n = data->size();
  auto& a = *data;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    std::complex<double> step(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
}

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

double MelToHz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

FrameGeometry ResolveGeometry(const FbankConfig& config, int sample_rate) {
  if (sample_rate <= 0) throw DataError("fbank: non-positive sample rate");
  if (config.num_filters < 1) throw DataError("fbank: num_filters must be >= 1");
  FrameGeometry g;
  g.frame_length = static_cast<int>(
      std::lround(sample_rate * config.frame_length_ms / 1000.0));
  g.frame_shift = static_cast<int>(
      std::lround(sample_rate * config.frame_shift_ms / 1000.0));
  if (g.frame_shift < 1 || g.frame_length < g.frame_shift)
    throw DataError("fbank: need frame_length >= frame_shift > 0");
  if (config.fft_size == 0) {
    g.fft_size = 1;
    while (g.fft_size < g.frame_length) g.fft_size <<= 1;
  } else {
    g.fft_size = config.fft_size;
    if (!IsPowerOfTwo(g.fft_size) || g.fft_size < g.frame_length)
      throw DataError("fbank: fft_size must be a power of two >= " +
                      std::to_string(g.frame_length));
  }
  double nyquist = 0.5 * sample_rate;
  g.low_freq = config.low_freq;
  g.high_freq = config.high_freq <= 0.0 ? nyquist : config.high_freq;
  if (g.low_freq < 0.0 || g.high_freq > nyquist || g.low_freq >= g.high_freq)
    throw DataError("fbank: cutoffs must satisfy 0 <= low < high <= Nyquist");
  return g;
}

int NumFrames(std::size_t num_samples, const FrameGeometry& geometry) {
  if (num_samples < static_cast<std::size_t>(geometry.frame_length)) return 0;
  return 1 + static_cast<int>((num_samples - geometry.frame_length) /
                              geometry.frame_shift);
}

Eigen::MatrixXd MelFilterbank(const FbankConfig& config, int sample_rate) {
  FrameGeometry g = ResolveGeometry(config, sample_rate);
  const int num_bins = g.fft_size / 2 + 1;
  const double mel_low = HzToMel(g.low_freq), mel_high = HzToMel(g.high_freq);
  const double mel_step = (mel_high - mel_low) / (config.num_filters + 1);
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(config.num_filters, num_bins);
  for (int m = 0; m < config.num_filters; ++m) {
    double left = mel_low + m * mel_step;
    double center = left + mel_step;
    double right = center + mel_step;
    for (int k = 0; k < num_bins; ++k) {
      double mel = HzToMel(static_cast<double>(k) * sample_rate / g.fft_size);
      if (mel > left && mel <= center)
        weights(m, k) = (mel - left) / (center - left);
      else if (mel > center && mel < right)
        weights(m, k) = (right - mel) / (right - center);
    }
  }
  return weights;
}

FeatureMatrix ExtractFbank(const AudioSignal& signal, const FbankConfig& config) {
  ValidateSignal(signal);
  const FrameGeometry g = ResolveGeometry(config, signal.sample_rate);
  const int num_frames = NumFrames(signal.samples.size(), g);
  if (num_frames < 1)
    throw DataError("fbank: signal of " + std::to_string(signal.samples.size()) +
                    " samples is shorter than one frame (" +
                    std::to_string(g.frame_length) + ")");
  const Eigen::MatrixXd filters = MelFilterbank(config, signal.sample_rate);
  const int num_bins = g.fft_size / 2 + 1;

  std::vector<double> window(g.frame_length);
  for (int n = 0; n < g.frame_length; ++n) {
    window[n] = g.frame_length == 1
                    ? 1.0
                    : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n /
                                             (g.frame_length - 1));
  }

  Eigen::MatrixXd log_energies(num_frames, config.num_filters);
  std::vector<std::complex<double>> buffer(g.fft_size);
  Eigen::VectorXd power(num_bins);
  for (int t = 0; t < num_frames; ++t) {
    const std::size_t offset = static_cast<std::size_t>(t) * g.frame_shift;
    std::fill(buffer.begin(), buffer.end(), std::complex<double>());
    for (int n = 0; n < g.frame_length; ++n)
      buffer[n] = signal.samples[offset + n] * window[n];
    Fft(&buffer);
    for (int k = 0; k < num_bins; ++k) power(k) = std::norm(buffer[k]);
    Eigen::VectorXd energies = filters * power;
    for (int m = 0; m < config.num_filters; ++m)
      log_energies(t, m) = std::log(std::max(energies(m), config.energy_floor));
  }
  if (config.mean_normalize)
    log_energies.rowwise() -= log_energies.colwise().mean();
  return log_energies.cast<float>();
}

FeatureBatchResult ExtractCorpusFeatures(const Manifest& manifest,
                                         const FbankConfig& config,
                                         const std::string& out_dir, int jobs) {
  std::filesystem::create_directories(out_dir);
  const auto& recordings = manifest.recordings();
  std::vector<std::string> errors(recordings.size());
  ParallelFor(recordings.size(), jobs, [&](std::size_t i) {
    const RecordingRecord& r = recordings[i];
    try {
      WriteMatrix(FeaturePath(out_dir, r.recording_id),
                  ExtractFbank(ReadRawAudio(r.source_path), config));
    } catch (const std::exception& e) {
      errors[i] = r.recording_id + ": " + e.what();
    }
  });
  FeatureBatchResult result;
  for (const auto& e : errors) {
    if (e.empty()) {
      ++result.written;
    } else {
      Log(LogLevel::kWarning, "features", e);
      result.failures.push_back(e);
    }
  }
  return result;
}

}  // namespace verifkit
