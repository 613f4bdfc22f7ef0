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

#ifndef VERIFKIT_PLDA_H_
#define VERIFKIT_PLDA_H_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace verifkit {

// Two-covariance PLDA: e = mean + y + z with y ~ N(0, between) the speaker
// factor and z ~ N(0, within) the session noise.
struct PldaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd between;  // symmetric PSD
  Eigen::MatrixXd within;   // symmetric PD

  int dim() const { return static_cast<int>(mean.size()); }
  // Throws NumericalError if shapes disagree, values are non-finite, the
  // within covariance has no Cholesky factor, or between has a clearly
  // negative eigenvalue.
  void Validate() const;
};

struct EmConfig {
  int iterations = 10;
  // Stop once the per-embedding log-likelihood gain drops below this.
  double tolerance = 1e-6;
};

// One n_i x d matrix of embeddings per speaker.
using SpeakerGroups = std::vector<Eigen::MatrixXd>;

// Groups rows by label, groups ordered by sorted label.
SpeakerGroups GroupRows(const Eigen::MatrixXd& rows,
                        std::span<const std::string> labels);

struct PldaFitResult {
  PldaModel model;
  // Marginal log-likelihood of the data under the initial model and after
  // every EM iteration.
  std::vector<double> log_likelihoods;
};

// EM for mean, between and within. Throws DataError with fewer than two
// speakers, an empty group, or no speaker with two or more embeddings;
// NumericalError if an update leaves the PSD/PD cone.
PldaFitResult FitPlda(const SpeakerGroups& groups, const EmConfig& config);

// Exact marginal log-likelihood, speakers independent, each speaker's
// embeddings jointly Gaussian.
double PldaLogLikelihood(const PldaModel& model, const SpeakerGroups& groups);

// Log-likelihood ratio of same-speaker versus different-speaker hypotheses
// for two embeddings, with the joint covariances
//   same = [[B+W, B], [B, B+W]],  diff = [[B+W, 0], [0, B+W]].
// The quadratic form is precomputed so each score is O(d^2) (O(d) once both
// sides are prepared).
class PldaScorer {
 public:
  explicit PldaScorer(const PldaModel& model);

  struct Prepared {
    Eigen::VectorXd centered;
    Eigen::VectorXd cross;  // cross_block * centered
    double quadratic = 0.0;  // centered' * diag_block * centered
  };
  Prepared Prepare(const Eigen::VectorXd& embedding) const;

  double Score(const Prepared& a, const Prepared& b) const;
  double Score(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  int dim() const { return static_cast<int>(mean_.size()); }
  // -0.5 logdet(same) + 0.5 logdet(diff).
  double constant() const { return constant_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd diag_block_;
  Eigen::MatrixXd cross_block_;
  double constant_ = 0.0;
};

// Throws DataError on a dimension mismatch.
double PldaScore(const PldaModel& model, const Eigen::VectorXd& enrol,
                 const Eigen::VectorXd& test);

// Mean of the embeddings, length-normalized. Throws DataError when empty.
Eigen::VectorXd AverageAndNormalize(std::span<const Eigen::VectorXd> embeddings);

// Multi-session enrolment by averaging preprocessed embeddings.
double ScoreEnrolment(const PldaScorer& scorer,
                      std::span<const Eigen::VectorXd> enrolment,
                      const Eigen::VectorXd& test);

struct AdaptConfig {
  double alpha_within = 0.75;
  double alpha_between = 0.25;

  // Throws DataError unless both are >= 0 and they sum to 1.
  void Validate() const;
};

// Unsupervised covariance-matching adaptation from first and second moments
// of in-domain data. The mean is replaced. In the basis where
// between + within is the identity and the adaptation covariance is diagonal
// (D), every direction with D_ii > 1 gets its excess D_ii - 1 added back,
// split alpha_between : alpha_within between the two covariances; other
// directions are unchanged. A rank-deficient adaptation covariance gets a
// 1e-6 * trace / d ridge and a warning.
PldaModel AdaptFromStats(const PldaModel& model,
                         const Eigen::VectorXd& adaptation_mean,
                         const Eigen::MatrixXd& adaptation_covariance,
                         const AdaptConfig& config);

// Same, from n x d adaptation embeddings (population covariance). Needs
// n >= d + 1.
PldaModel Adapt(const PldaModel& model, const Eigen::MatrixXd& rows,
                const AdaptConfig& config);

// "SVP1", u32 dim, then mean, between, within as f64 little-endian
// row-major.
std::string EncodePlda(const PldaModel& model);
PldaModel DecodePlda(std::string_view bytes, const std::string& context = "plda");
PldaModel ReadPlda(const std::string& path);
void WritePlda(const std::string& path, const PldaModel& model);

}  // namespace verifkit

#endif  // VERIFKIT_PLDA_H_
