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

#include "verifkit/extractor_model.h"

#include <cmath>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"
#include "verifkit/rng.h"

namespace verifkit {

namespace {

void GlorotInit(Eigen::MatrixXd* weight, Rng* rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(weight->rows() + weight->cols()));
  // Row-major fill order keeps the stream independent of Eigen storage.
  for (Eigen::Index r = 0; r < weight->rows(); ++r)
    for (Eigen::Index c = 0; c < weight->cols(); ++c)
      (*weight)(r, c) = rng->Uniform(-limit, limit);
}

AffineLayer MakeAffine(int input_dim, int output_dim, Rng* rng) {
  AffineLayer layer;
  layer.weight.resize(output_dim, input_dim);
  GlorotInit(&layer.weight, rng);
  layer.bias = Eigen::VectorXd::Zero(output_dim);
  return layer;
}

void PutMatrix(BinaryWriter* w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w->PutF64(m(r, c));
}

void PutVector(BinaryWriter* w, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w->PutF64(v(i));
}

Eigen::MatrixXd GetMatrix(BinaryReader* r, std::uint32_t rows,
                          std::uint32_t cols) {
  r->Require(static_cast<std::size_t>(rows) * cols * 8, "weights");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r->GetF64();
  return m;
}

Eigen::VectorXd GetVector(BinaryReader* r, std::uint32_t size) {
  r->Require(static_cast<std::size_t>(size) * 8, "bias");
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r->GetF64();
  return v;
}

void PutAffine(BinaryWriter* w, const AffineLayer& layer) {
  w->PutU32(static_cast<std::uint32_t>(layer.input_dim()));
  w->PutU32(static_cast<std::uint32_t>(layer.output_dim()));
  PutMatrix(w, layer.weight);
  PutVector(w, layer.bias);
}

AffineLayer GetAffine(BinaryReader* r) {
  AffineLayer layer;
  std::uint32_t in = r->GetU32(), out = r->GetU32();
  layer.weight = GetMatrix(r, out, in);
  layer.bias = GetVector(r, out);
  return layer;
}

}  // namespace

void ValidateLayerSpec(const TdnnLayerSpec& spec) {
  if (spec.context_offsets.empty())
    throw DataError("tdnn layer: empty context offsets");
  for (std::size_t i = 1; i < spec.context_offsets.size(); ++i)
    if (spec.context_offsets[i] <= spec.context_offsets[i - 1])
      throw DataError("tdnn layer: context offsets must be strictly increasing");
  if (spec.input_dim <= 0 || spec.output_dim <= 0)
    throw DataError("tdnn layer: dims must be positive");
}

ArchitectureConfig ArchitectureConfig::Full(int input_dim) {
  ArchitectureConfig c;
  c.input_dim = input_dim;
  c.frame_offsets = {{-2, -1, 0, 1, 2}, {-2, 0, 2}, {-3, 0, 3}, {0}, {0}};
  c.frame_dims = {512, 512, 512, 512, 1500};
  c.segment_dims = {512, 512};
  return c;
}

ArchitectureConfig ArchitectureConfig::Desk(int input_dim) {
  ArchitectureConfig c = Full(input_dim);
  c.frame_dims = {32, 32, 32, 32, 96};
  c.segment_dims = {24, 24};
  return c;
}

int ExtractorModel::TotalContext() const {
  int total = 0;
  for (const auto& layer : frame_layers) total += layer.spec.ContextSpan();
  return total;
}

std::vector<std::span<double>> ExtractorModel::Parameters() {
  std::vector<std::span<double>> out;
  auto add = [&out](auto& m) {
    out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  };
  for (auto& l : frame_layers) {
    add(l.weight);
    add(l.bias);
  }
  for (auto& l : segment_layers) {
    add(l.weight);
    add(l.bias);
  }
  add(head.weight);
  add(head.bias);
  return out;
}

std::vector<std::span<const double>> ExtractorModel::Parameters() const {
  std::vector<std::span<const double>> out;
  for (auto p : const_cast<ExtractorModel*>(this)->Parameters())
    out.emplace_back(p.data(), p.size());
  return out;
}

std::size_t ExtractorModel::NumParameters() const {
  std::size_t n = 0;
  for (auto p : Parameters()) n += p.size();
  return n;
}

ExtractorModel ExtractorModel::ZerosLike() const {
  ExtractorModel zeros = *this;
  for (auto p : zeros.Parameters()) std::fill(p.begin(), p.end(), 0.0);
  return zeros;
}

void ExtractorModel::Validate() const {
  if (frame_layers.empty()) throw DataError("extractor: no frame layers");
  if (segment_layers.empty()) throw DataError("extractor: no segment layers");
  for (std::size_t i = 0; i < frame_layers.size(); ++i) {
    const auto& l = frame_layers[i];
    ValidateLayerSpec(l.spec);
    if (i > 0 && l.spec.input_dim != frame_layers[i - 1].spec.output_dim)
      throw DataError("extractor: frame layer " + std::to_string(i) +
                      " input dim mismatch");
    const auto k = static_cast<Eigen::Index>(l.spec.context_offsets.size());
    if (l.weight.rows() != l.spec.output_dim ||
        l.weight.cols() != l.spec.input_dim * k ||
        l.bias.size() != l.spec.output_dim)
      throw DataError("extractor: frame layer " + std::to_string(i) +
                      " weight shape mismatch");
  }
  int expected = pooled_dim();
  for (std::size_t i = 0; i < segment_layers.size(); ++i) {
    const auto& l = segment_layers[i];
    if (l.input_dim() != expected || l.bias.size() != l.output_dim())
      throw DataError("extractor: segment layer " + std::to_string(i) +
                      " shape mismatch");
    expected = l.output_dim();
  }
  if (head.input_dim() != expected || head.bias.size() != head.output_dim() ||
      head.output_dim() < 1)
    throw DataError("extractor: head shape mismatch");
  if (embedding_tap < 0 ||
      embedding_tap >= static_cast<int>(segment_layers.size()))
    throw DataError("extractor: embedding tap out of range");
}

bool BitwiseEqual(const ExtractorModel& a, const ExtractorModel& b) {
  return EncodeExtractor(a) == EncodeExtractor(b);
}

ExtractorModel CreateExtractor(const ArchitectureConfig& config,
                               int num_speakers, std::uint64_t seed) {
  if (config.frame_offsets.size() != config.frame_dims.size() ||
      config.frame_dims.empty() || config.segment_dims.empty())
    throw DataError("extractor: inconsistent architecture config");
  if (num_speakers < 1) throw DataError("extractor: need >= 1 output");
  Rng rng(seed);
  ExtractorModel model;
  int input = config.input_dim;
  for (std::size_t i = 0; i < config.frame_dims.size(); ++i) {
    TdnnLayer layer;
    layer.spec.context_offsets = config.frame_offsets[i];
    layer.spec.input_dim = input;
    layer.spec.output_dim = config.frame_dims[i];
    ValidateLayerSpec(layer.spec);
    const int fan_in =
        input * static_cast<int>(layer.spec.context_offsets.size());
    layer.weight.resize(layer.spec.output_dim, fan_in);
    GlorotInit(&layer.weight, &rng);
    layer.bias = Eigen::VectorXd::Zero(layer.spec.output_dim);
    model.frame_layers.push_back(std::move(layer));
    input = config.frame_dims[i];
  }
  input = 2 * input;
  for (int dim : config.segment_dims) {
    model.segment_layers.push_back(MakeAffine(input, dim, &rng));
    input = dim;
  }
  model.head = MakeAffine(input, num_speakers, &rng);
  model.embedding_tap = config.embedding_tap;
  model.Validate();
  return model;
}

void ReinitializeHead(ExtractorModel* model, int num_speakers,
                      std::uint64_t seed) {
  if (num_speakers < 1) throw DataError("extractor: need >= 1 output");
  Rng rng(seed);
  model->head = MakeAffine(model->segment_layers.back().output_dim(),
                           num_speakers, &rng);
}

std::string EncodeExtractor(const ExtractorModel& model) {
  BinaryWriter w;
  w.PutMagic("SVX1");
  w.PutU32(static_cast<std::uint32_t>(model.frame_layers.size()));
  for (const auto& l : model.frame_layers) {
    w.PutU32(static_cast<std::uint32_t>(l.spec.context_offsets.size()));
    for (int o : l.spec.context_offsets) w.PutI32(o);
    w.PutU32(static_cast<std::uint32_t>(l.spec.input_dim));
    w.PutU32(static_cast<std::uint32_t>(l.spec.output_dim));
    w.PutU32(l.spec.nonlinearity == Nonlinearity::kReLU ? 0u : 1u);
    PutMatrix(&w, l.weight);
    PutVector(&w, l.bias);
  }
  w.PutU32(static_cast<std::uint32_t>(model.segment_layers.size()));
  for (const auto& l : model.segment_layers) PutAffine(&w, l);
  w.PutU32(static_cast<std::uint32_t>(model.embedding_tap));
  PutAffine(&w, model.head);
  return w.Release();
}

ExtractorModel DecodeExtractor(std::string_view bytes,
                               const std::string& context) {
  BinaryReader r(bytes, context);
  r.ExpectMagic("SVX1");
  ExtractorModel model;
  std::uint32_t num_frame = r.GetU32();
  for (std::uint32_t i = 0; i < num_frame; ++i) {
    TdnnLayer l;
    std::uint32_t k = r.GetU32();
    r.Require(static_cast<std::size_t>(k) * 4, "offsets");
    for (std::uint32_t j = 0; j < k; ++j) l.spec.context_offsets.push_back(r.GetI32());
    l.spec.input_dim = static_cast<int>(r.GetU32());
    l.spec.output_dim = static_cast<int>(r.GetU32());
    std::uint32_t nl = r.GetU32();
    if (nl > 1) throw DataError(context + ": unknown nonlinearity code");
    l.spec.nonlinearity = nl == 0 ? Nonlinearity::kReLU : Nonlinearity::kNone;
    ValidateLayerSpec(l.spec);
    l.weight = GetMatrix(&r, l.spec.output_dim, l.spec.input_dim * k);
    l.bias = GetVector(&r, l.spec.output_dim);
    model.frame_layers.push_back(std::move(l));
  }
  std::uint32_t num_segment = r.GetU32();
  for (std::uint32_t i = 0; i < num_segment; ++i)
    model.segment_layers.push_back(GetAffine(&r));
  model.embedding_tap = static_cast<int>(r.GetU32());
  model.head = GetAffine(&r);
  if (!r.AtEnd()) throw DataError(context + ": trailing bytes");
  model.Validate();
  return model;
}

ExtractorModel ReadExtractor(const std::string& path) {
  return DecodeExtractor(ReadFileBytes(path), path);
}

void WriteExtractor(const std::string& path, const ExtractorModel& model) {
  WriteFileBytes(path, EncodeExtractor(model));
}

}  // namespace verifkit
