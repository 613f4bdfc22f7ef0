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

#ifndef VERIFKIT_EXTRACTOR_MODEL_H_
#define VERIFKIT_EXTRACTOR_MODEL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace verifkit {

enum class Nonlinearity { kReLU, kNone };

struct TdnnLayerSpec {
  // Strictly increasing frame offsets spliced together, e.g. {-2, 0, 2}.
  std::vector<int> context_offsets;
  int input_dim = 0;
  int output_dim = 0;
  Nonlinearity nonlinearity = Nonlinearity::kReLU;

  // Frames lost at the utterance edges by this layer.
  int ContextSpan() const {
    return context_offsets.back() - context_offsets.front();
  }
};

// Throws DataError unless offsets are non-empty and strictly increasing and
// both dims are positive.
void ValidateLayerSpec(const TdnnLayerSpec& spec);

// Frame-level layer: affine over the spliced context, then the nonlinearity.
// weight is output_dim x (input_dim * num_offsets); column block j multiplies
// the frame at context_offsets[j].
struct TdnnLayer {
  TdnnLayerSpec spec;
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct AffineLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  int input_dim() const { return static_cast<int>(weight.cols()); }
  int output_dim() const { return static_cast<int>(weight.rows()); }
};

struct ArchitectureConfig {
  int input_dim = 40;
  std::vector<std::vector<int>> frame_offsets;
  std::vector<int> frame_dims;
  std::vector<int> segment_dims;
  int embedding_tap = 0;

  // x-vector recipe: widths 512,512,512,512,1500; segment layers 512,512.
  static ArchitectureConfig Full(int input_dim);
  // Same topology with widths 32,32,32,32,96 and segment layers 24,24.
  static ArchitectureConfig Desk(int input_dim);
};

// TDNN frame block, statistics pooling, ReLU segment layers and a softmax
// head. The embedding is the pre-activation output of segment layer
// `embedding_tap`.
struct ExtractorModel {
  std::vector<TdnnLayer> frame_layers;
  std::vector<AffineLayer> segment_layers;
  AffineLayer head;
  int embedding_tap = 0;

  int input_dim() const { return frame_layers.front().spec.input_dim; }
  int num_speakers() const { return head.output_dim(); }
  int pooled_dim() const { return 2 * frame_layers.back().spec.output_dim; }
  int embedding_dim() const {
    return segment_layers[static_cast<std::size_t>(embedding_tap)].output_dim();
  }
  // Sum of per-layer context spans; an input needs TotalContext() + 1 frames.
  int TotalContext() const;
  int MinFrames() const { return TotalContext() + 1; }

  // Every parameter tensor in a fixed order (frame layers, segment layers,
  // head; weight before bias).
  std::vector<std::span<double>> Parameters();
  std::vector<std::span<const double>> Parameters() const;
  std::size_t NumParameters() const;

  ExtractorModel ZerosLike() const;

  // Throws DataError on incompatible shapes.
  void Validate() const;
};

bool BitwiseEqual(const ExtractorModel& a, const ExtractorModel& b);

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
ExtractorModel CreateExtractor(const ArchitectureConfig& config,
                               int num_speakers, std::uint64_t seed);

// Replaces the softmax head with a fresh num_speakers-way head, same
// initialization rule.
void ReinitializeHead(ExtractorModel* model, int num_speakers,
                      std::uint64_t seed);

// "SVX1", u32 frame-layer count; per frame layer u32 offset count, i32
// offsets, u32 input dim, u32 output dim, u32 nonlinearity, f64 weight
// (row-major), f64 bias; u32 segment-layer count; per segment layer u32 input
// dim, u32 output dim, f64 weight, f64 bias; u32 embedding tap; head as a
// segment layer. All little-endian.
std::string EncodeExtractor(const ExtractorModel& model);
ExtractorModel DecodeExtractor(std::string_view bytes,
                               const std::string& context = "extractor");
ExtractorModel ReadExtractor(const std::string& path);
void WriteExtractor(const std::string& path, const ExtractorModel& model);

}  // namespace verifkit

#endif  // VERIFKIT_EXTRACTOR_MODEL_H_
