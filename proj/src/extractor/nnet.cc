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

#include <algorithm>
#include <cmath>
#include <vector>

#include "verifkit/error.h"
#include "verifkit/extractor.h"

namespace verifkit {

namespace {

struct FrameLayerCache {
  Eigen::MatrixXd spliced;  // T_out x (input_dim * k)
  Eigen::MatrixXd preact;   // T_out x output_dim
  Eigen::MatrixXd output;   // T_out x output_dim
};

struct SegmentCache {
  std::vector<FrameLayerCache> frame;
  Eigen::VectorXd pooled;
  Eigen::VectorXd variance;  // raw E[h^2] - mean^2 of the last frame layer
  std::vector<Eigen::VectorXd> seg_preact;
  std::vector<Eigen::VectorXd> seg_output;
  Eigen::VectorXd logits;
};

// Column means and raw second moments, accumulated in sorted order so the
// result does not depend on frame order.
void PoolMoments(const Eigen::Ref<const Eigen::MatrixXd>& h,
                 Eigen::VectorXd* mean, Eigen::VectorXd* second) {
  const double inv_t = 1.0 / static_cast<double>(h.rows());
  mean->resize(h.cols());
  second->resize(h.cols());
  std::vector<double> column(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    for (Eigen::Index t = 0; t < h.rows(); ++t)
      column[static_cast<std::size_t>(t)] = h(t, j);
    std::sort(column.begin(), column.end());
    double sum = 0.0, sum_sq = 0.0;
    for (double v : column) {
      sum += v;
      sum_sq += v * v;
    }
    (*mean)(j) = sum * inv_t;
    (*second)(j) = sum_sq * inv_t;
  }
}

Eigen::MatrixXd Splice(const Eigen::MatrixXd& input,
                       const std::vector<int>& offsets) {
  const Eigen::Index dim = input.cols();
  const Eigen::Index out_rows = input.rows() - (offsets.back() - offsets.front());
  Eigen::MatrixXd spliced(out_rows, dim * static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t j = 0; j < offsets.size(); ++j)
    spliced.middleCols(static_cast<Eigen::Index>(j) * dim, dim) =
        input.middleRows(offsets[j] - offsets.front(), out_rows);
  return spliced;
}

void CheckInput(const ExtractorModel& model,
                const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.cols() != model.input_dim())
    throw DataError("extractor: feature dim " + std::to_string(features.cols()) +
                    " != model input dim " + std::to_string(model.input_dim()));
  if (features.rows() < model.MinFrames())
    throw DataError("extractor: " + std::to_string(features.rows()) +
                    " frames, need at least " +
                    std::to_string(model.MinFrames()) + " for the context span");
}

void RunForward(const ExtractorModel& model,
                const Eigen::Ref<const Eigen::MatrixXd>& features,
                SegmentCache* cache) {
  CheckInput(model, features);
  cache->frame.resize(model.frame_layers.size());
  const Eigen::MatrixXd* input = nullptr;
  Eigen::MatrixXd first = features;
  input = &first;
  for (std::size_t l = 0; l < model.frame_layers.size(); ++l) {
    const TdnnLayer& layer = model.frame_layers[l];
    FrameLayerCache& c = cache->frame[l];
    c.spliced = Splice(*input, layer.spec.context_offsets);
    c.preact = c.spliced * layer.weight.transpose();
    c.preact.rowwise() += layer.bias.transpose();
    if (layer.spec.nonlinearity == Nonlinearity::kReLU)
      c.output = c.preact.cwiseMax(0.0);
    else
      c.output = c.preact;
    input = &c.output;
  }
  const Eigen::MatrixXd& h = *input;
  Eigen::VectorXd mean, second;
  PoolMoments(h, &mean, &second);
  cache->variance = second - mean.cwiseProduct(mean);
  cache->pooled.resize(2 * mean.size());
  cache->pooled.head(mean.size()) = mean;
  cache->pooled.tail(mean.size()) =
      cache->variance.cwiseMax(kStatsPoolEpsilon).cwiseSqrt();

  cache->seg_preact.resize(model.segment_layers.size());
  cache->seg_output.resize(model.segment_layers.size());
  const Eigen::VectorXd* seg_input = &cache->pooled;
  for (std::size_t l = 0; l < model.segment_layers.size(); ++l) {
    const AffineLayer& layer = model.segment_layers[l];
    cache->seg_preact[l] = layer.weight * *seg_input + layer.bias;
    cache->seg_output[l] = cache->seg_preact[l].cwiseMax(0.0);
    seg_input = &cache->seg_output[l];
  }
  cache->logits = model.head.weight * *seg_input + model.head.bias;
}

// d_logits is dLoss/dlogits for this segment.
void RunBackward(const ExtractorModel& model, const SegmentCache& cache,
                 const Eigen::VectorXd& d_logits, ExtractorModel* grad) {
  const std::size_t num_seg = model.segment_layers.size();
  const Eigen::VectorXd& last = cache.seg_output[num_seg - 1];
  grad->head.weight.noalias() += d_logits * last.transpose();
  grad->head.bias += d_logits;
  Eigen::VectorXd d_out = model.head.weight.transpose() * d_logits;
  for (std::size_t l = num_seg; l-- > 0;) {
    Eigen::VectorXd d_pre =
        (cache.seg_preact[l].array() > 0.0).select(d_out, 0.0);
    const Eigen::VectorXd& in = l == 0 ? cache.pooled : cache.seg_output[l - 1];
    grad->segment_layers[l].weight.noalias() += d_pre * in.transpose();
    grad->segment_layers[l].bias += d_pre;
    d_out = model.segment_layers[l].weight.transpose() * d_pre;
  }

  // Statistics pooling: d_out holds [d_mean; d_stddev].
  const FrameLayerCache& top = cache.frame.back();
  const Eigen::MatrixXd& h = top.output;
  const Eigen::Index dim = h.cols();
  const double inv_t = 1.0 / static_cast<double>(h.rows());
  Eigen::RowVectorXd d_mean = d_out.head(dim).transpose() * inv_t;
  Eigen::RowVectorXd d_std = d_out.tail(dim).transpose();
  Eigen::RowVectorXd mean = cache.pooled.head(dim).transpose();
  Eigen::RowVectorXd std_coef(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    // Below the floor the standard deviation is constant.
    std_coef(i) = cache.variance(i) > kStatsPoolEpsilon
                      ? d_std(i) * inv_t / cache.pooled(dim + i)
                      : 0.0;
  }
  Eigen::MatrixXd d_h = (h.rowwise() - mean).array().rowwise() * std_coef.array();
  d_h.rowwise() += d_mean;

  for (std::size_t l = model.frame_layers.size(); l-- > 0;) {
    const TdnnLayer& layer = model.frame_layers[l];
    const FrameLayerCache& c = cache.frame[l];
    Eigen::MatrixXd d_pre;
    if (layer.spec.nonlinearity == Nonlinearity::kReLU)
      d_pre = (c.preact.array() > 0.0).select(d_h, 0.0);
    else
      d_pre = std::move(d_h);
    grad->frame_layers[l].weight.noalias() += d_pre.transpose() * c.spliced;
    grad->frame_layers[l].bias += d_pre.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd d_spliced = d_pre * layer.weight;
    const auto& offsets = layer.spec.context_offsets;
    const Eigen::Index in_dim = layer.spec.input_dim;
    const Eigen::Index out_rows = c.preact.rows();
    d_h = Eigen::MatrixXd::Zero(out_rows + layer.spec.ContextSpan(), in_dim);
    for (std::size_t j = 0; j < offsets.size(); ++j)
      d_h.middleRows(offsets[j] - offsets.front(), out_rows) +=
          d_spliced.middleCols(static_cast<Eigen::Index>(j) * in_dim, in_dim);
  }
}

}  // namespace

Eigen::VectorXd StatsPool(const Eigen::Ref<const Eigen::MatrixXd>& frames,
                          double epsilon) {
  if (frames.rows() == 0) throw DataError("stats pooling: empty input");
  Eigen::VectorXd mean, second;
  PoolMoments(frames, &mean, &second);
  Eigen::VectorXd out(2 * mean.size());
  out.head(mean.size()) = mean;
  out.tail(mean.size()) =
      (second - mean.cwiseProduct(mean)).cwiseMax(epsilon).cwiseSqrt();
  return out;
}

ForwardOutput Forward(const ExtractorModel& model,
                      const Eigen::MatrixXd& features) {
  SegmentCache cache;
  RunForward(model, features, &cache);
  return {cache.logits,
          cache.seg_preact[static_cast<std::size_t>(model.embedding_tap)]};
}

ForwardOutput Forward(const ExtractorModel& model, const FeatureMatrix& features) {
  Eigen::MatrixXd converted = features.cast<double>();
  return Forward(model, converted);
}

double CrossEntropy(const Eigen::Ref<const Eigen::MatrixXd>& logits,
                    std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || labels.empty())
    throw DataError("cross-entropy: need one label per logit row");
  double total = 0.0;
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const int label = labels[static_cast<std::size_t>(n)];
    if (label < 0 || label >= logits.cols())
      throw DataError("cross-entropy: label " + std::to_string(label) +
                      " outside [0, " + std::to_string(logits.cols()) + ")");
    const double max = logits.row(n).maxCoeff();
    const double lse =
        max + std::log((logits.row(n).array() - max).exp().sum());
    total += lse - logits(n, label);
  }
  return total / static_cast<double>(logits.rows());
}

double LossAndGradient(const ExtractorModel& model,
                       std::span<const Eigen::MatrixXd> segments,
                       std::span<const int> labels, ExtractorModel* gradient,
                       int* num_correct) {
  if (segments.size() != labels.size() || segments.empty())
    throw DataError("loss: need one label per segment");
  const double inv_batch = 1.0 / static_cast<double>(segments.size());
  const int num_classes = model.num_speakers();
  double total = 0.0;
  int correct = 0;
  SegmentCache cache;
  for (std::size_t n = 0; n < segments.size(); ++n) {
    const int label = labels[n];
    if (label < 0 || label >= num_classes)
      throw DataError("loss: label " + std::to_string(label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    RunForward(model, segments[n], &cache);
    const Eigen::VectorXd& logits = cache.logits;
    Eigen::Index argmax;
    const double max = logits.maxCoeff(&argmax);
    if (argmax == label) ++correct;
    Eigen::VectorXd probs = (logits.array() - max).exp();
    const double sum = probs.sum();
    total += max + std::log(sum) - logits(label);
    probs /= sum;
    probs(label) -= 1.0;
    probs *= inv_batch;
    RunBackward(model, cache, probs, gradient);
  }
  if (num_correct != nullptr) *num_correct = correct;
  return total * inv_batch;
}

}  // namespace verifkit
