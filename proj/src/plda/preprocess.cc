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

#include "verifkit/preprocess.h"

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"
#include "verifkit/log.h"

namespace verifkit {

void LengthNormalize(Eigen::VectorXd* v) {
  const double norm = v->norm();
  if (norm == 0.0) return;
  const double scale = std::sqrt(static_cast<double>(v->size())) / norm;
  if (std::abs(scale - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon())
    return;
  *v *= scale;
}

PreprocessChain::PreprocessChain(Eigen::VectorXd mean, Eigen::MatrixXd lda,
                                 bool length_norm)
    : mean_(std::move(mean)), lda_(std::move(lda)), length_norm_(length_norm) {
  if (lda_.size() > 0 && lda_.cols() != mean_.size())
    throw DataError("preprocess: LDA columns != mean dim");
}

PreprocessChain PreprocessChain::Fit(const Eigen::MatrixXd& rows,
                                     std::span<const std::string> labels,
                                     const PreprocessOptions& options) {
  if (rows.rows() == 0) throw DataError("preprocess: no embeddings");
  if (static_cast<std::size_t>(rows.rows()) != labels.size())
    throw DataError("preprocess: one label per embedding required");
  const Eigen::Index d = rows.cols();
  Eigen::VectorXd mean = rows.colwise().mean().transpose();
  Eigen::MatrixXd lda;
  if (options.lda_dim > 0) {
    if (options.lda_dim > d)
      throw DataError("preprocess: lda_dim " + std::to_string(options.lda_dim) +
                      " exceeds embedding dim " + std::to_string(d));
    std::map<std::string_view, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
      groups[labels[static_cast<std::size_t>(i)]].push_back(i);
    if (groups.size() < 2)
      throw DataError("preprocess: LDA needs at least 2 speakers");
    if (options.lda_dim > static_cast<int>(groups.size()) - 1)
      LogMessage(LogLevel::kWarning, "preprocess")
          << "lda_dim " << options.lda_dim << " exceeds speakers - 1 = "
          << groups.size() - 1;
    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
    for (const auto& [label, members] : groups) {
      Eigen::VectorXd group_mean = Eigen::VectorXd::Zero(d);
      for (Eigen::Index i : members) group_mean += rows.row(i).transpose();
      group_mean /= static_cast<double>(members.size());
      for (Eigen::Index i : members) {
        Eigen::VectorXd diff = rows.row(i).transpose() - group_mean;
        within.noalias() += diff * diff.transpose();
      }
      Eigen::VectorXd offset = group_mean - mean;
      between.noalias() +=
          static_cast<double>(members.size()) * offset * offset.transpose();
    }
    const double n = static_cast<double>(rows.rows());
    within /= n;
    between /= n;
    const double trace = within.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(within);
    if (trace <= 0.0 ||
        check.eigenvalues().minCoeff() <= 1e-10 * trace / static_cast<double>(d)) {
      const double ridge =
          1e-6 * (trace > 0.0 ? trace / static_cast<double>(d) : 1.0);
      LogMessage(LogLevel::kWarning, "preprocess")
          << "singular within-class scatter; adding ridge " << ridge;
      within += ridge * Eigen::MatrixXd::Identity(d, d);
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between,
                                                                     within);
    if (solver.info() != Eigen::Success)
      throw NumericalError("preprocess: LDA eigenproblem failed");
    lda.resize(options.lda_dim, d);
    for (int k = 0; k < options.lda_dim; ++k) {
      // Eigenvalues ascend; take from the top.
      Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - k);
      Eigen::Index pivot;
      v.cwiseAbs().maxCoeff(&pivot);
      if (v(pivot) < 0.0) v = -v;
      lda.row(k) = v.transpose();
    }
  }
  return PreprocessChain(std::move(mean), std::move(lda), options.length_norm);
}

Eigen::VectorXd PreprocessChain::ApplyLinear(
    const Eigen::VectorXd& embedding) const {
  if (embedding.size() != mean_.size())
    throw DataError("preprocess: embedding dim " +
                    std::to_string(embedding.size()) + " != " +
                    std::to_string(mean_.size()));
  Eigen::VectorXd centered = embedding - mean_;
  if (has_lda()) return lda_ * centered;
  return centered;
}

Eigen::VectorXd PreprocessChain::Apply(const Eigen::VectorXd& embedding) const {
  Eigen::VectorXd out = ApplyLinear(embedding);
  if (length_norm_) LengthNormalize(&out);
  return out;
}

Eigen::MatrixXd PreprocessChain::ApplyRows(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out(rows.rows(), output_dim());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.row(i) = Apply(rows.row(i).transpose()).transpose();
  return out;
}

std::string EncodePreprocess(const PreprocessChain& chain) {
  BinaryWriter w;
  w.PutMagic("SVT1");
  w.PutU32(static_cast<std::uint32_t>(chain.input_dim()));
  w.PutU32(chain.has_lda() ? static_cast<std::uint32_t>(chain.output_dim()) : 0u);
  w.PutU32(chain.length_norm() ? 1u : 0u);
  for (Eigen::Index i = 0; i < chain.mean().size(); ++i) w.PutF64(chain.mean()(i));
  for (Eigen::Index r = 0; r < chain.lda().rows(); ++r)
    for (Eigen::Index c = 0; c < chain.lda().cols(); ++c)
      w.PutF64(chain.lda()(r, c));
  return w.Release();
}

PreprocessChain DecodePreprocess(std::string_view bytes,
                                 const std::string& context) {
  BinaryReader r(bytes, context);
  r.ExpectMagic("SVT1");
  std::uint32_t in = r.GetU32(), out = r.GetU32(), norm = r.GetU32();
  r.Require((static_cast<std::size_t>(in) + static_cast<std::size_t>(in) * out) * 8,
            "preprocess payload");
  Eigen::VectorXd mean(in);
  for (std::uint32_t i = 0; i < in; ++i) mean(i) = r.GetF64();
  Eigen::MatrixXd lda(out, out > 0 ? in : 0);
  for (std::uint32_t i = 0; i < out; ++i)
    for (std::uint32_t j = 0; j < in; ++j) lda(i, j) = r.GetF64();
  if (!r.AtEnd()) throw DataError(context + ": trailing bytes");
  return PreprocessChain(std::move(mean), std::move(lda), norm != 0);
}

PreprocessChain ReadPreprocess(const std::string& path) {
  return DecodePreprocess(ReadFileBytes(path), path);
}

void WritePreprocess(const std::string& path, const PreprocessChain& chain) {
  WriteFileBytes(path, EncodePreprocess(chain));
}

}  // namespace verifkit
