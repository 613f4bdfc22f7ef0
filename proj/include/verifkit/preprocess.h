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

#ifndef VERIFKIT_PREPROCESS_H_
#define VERIFKIT_PREPROCESS_H_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>

namespace verifkit {

// Scales v to norm sqrt(dim). Vectors already at that norm (to within a few
// ulps) are left bit-for-bit unchanged, so the operation is idempotent. A zero
// vector is left as is.
void LengthNormalize(Eigen::VectorXd* v);

struct PreprocessOptions {
  // 0 disables LDA.
  int lda_dim = 0;
  bool length_norm = true;
};

// mean subtraction -> optional LDA projection -> length normalization.
class PreprocessChain {
 public:
  PreprocessChain() = default;
  PreprocessChain(Eigen::VectorXd mean, Eigen::MatrixXd lda, bool length_norm);

  // rows: n x d embeddings; labels: speaker label per row (any ids). LDA
  // maximizes between/within scatter via the generalized symmetric
  // eigenproblem. A singular within-class scatter gets a 1e-6 * trace / d
  // ridge and a warning. Throws DataError with LDA enabled and fewer than
  // two speakers, or lda_dim > d.
  static PreprocessChain Fit(const Eigen::MatrixXd& rows,
                             std::span<const std::string> labels,
                             const PreprocessOptions& options);

  // Mean subtraction and projection only.
  Eigen::VectorXd ApplyLinear(const Eigen::VectorXd& embedding) const;
  Eigen::VectorXd Apply(const Eigen::VectorXd& embedding) const;
  Eigen::MatrixXd ApplyRows(const Eigen::MatrixXd& rows) const;

  int input_dim() const { return static_cast<int>(mean_.size()); }
  int output_dim() const {
    return has_lda() ? static_cast<int>(lda_.rows()) : input_dim();
  }
  bool has_lda() const { return lda_.size() > 0; }
  bool length_norm() const { return length_norm_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& lda() const { return lda_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd lda_;  // output_dim x input_dim, empty when disabled
  bool length_norm_ = true;
};

// "SVT1", u32 input dim, u32 output dim (0 = no LDA), u32 length-norm flag,
// f64 mean, f64 LDA matrix row-major.
std::string EncodePreprocess(const PreprocessChain& chain);
PreprocessChain DecodePreprocess(std::string_view bytes,
                                 const std::string& context = "preprocess");
PreprocessChain ReadPreprocess(const std::string& path);
void WritePreprocess(const std::string& path, const PreprocessChain& chain);

}  // namespace verifkit

#endif  // VERIFKIT_PREPROCESS_H_
