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

#include "verifkit/plda.h"

#include <cmath>
#include <map>
#include <numbers>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"
#include "verifkit/log.h"
#include "verifkit/preprocess.h"

namespace verifkit {

namespace {

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

struct SpeakerStats {
  double count = 0.0;
  Eigen::VectorXd mean;
};

struct GroupStats {
  std::vector<SpeakerStats> speakers;
  Eigen::MatrixXd scatter;  // within-speaker scatter summed over speakers
  double total = 0.0;
};

GroupStats Summarize(const SpeakerGroups& groups) {
  if (groups.empty()) throw DataError("plda: no speakers");
  const Eigen::Index d = groups.front().cols();
  if (d < 1) throw DataError("plda: zero-dimensional embeddings");
  GroupStats stats;
  stats.scatter = Eigen::MatrixXd::Zero(d, d);
  for (const auto& g : groups) {
    if (g.rows() == 0) throw DataError("plda: speaker with no embeddings");
    if (g.cols() != d) throw DataError("plda: inconsistent embedding dims");
    SpeakerStats s;
    s.count = static_cast<double>(g.rows());
    s.mean = g.colwise().mean().transpose();
    Eigen::MatrixXd centered = g.rowwise() - s.mean.transpose();
    stats.scatter.noalias() += centered.transpose() * centered;
    stats.total += s.count;
    stats.speakers.push_back(std::move(s));
  }
  return stats;
}

double LogLikelihood(const PldaModel& model, const GroupStats& stats) {
  const double d = static_cast<double>(model.dim());
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Eigen::LLT<Eigen::MatrixXd> within_llt(model.within);
  if (within_llt.info() != Eigen::Success)
    throw NumericalError("plda: within covariance is not positive definite");
  const double logdet_within =
      2.0 * within_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double scatter_term =
      within_llt.solve(stats.scatter).trace();

  // Factorizations of between + within / n shared across speakers with the
  // same count.
  std::map<double, Eigen::LLT<Eigen::MatrixXd>> by_count;
  double total = -0.5 * scatter_term;
  for (const auto& s : stats.speakers) {
    auto it = by_count.find(s.count);
    if (it == by_count.end())
      it = by_count.emplace(s.count, Eigen::LLT<Eigen::MatrixXd>(
                                         model.between + model.within / s.count))
               .first;
    const auto& llt = it->second;
    if (llt.info() != Eigen::Success)
      throw NumericalError("plda: marginal covariance not positive definite");
    Eigen::VectorXd diff = s.mean - model.mean;
    const double quad = diff.dot(llt.solve(diff));
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    total += -0.5 * (d * log_2pi + logdet + quad);
    total += -0.5 * (s.count - 1.0) * (d * log_2pi + logdet_within) -
             0.5 * d * std::log(s.count);
  }
  return total;
}

}  // namespace

void PldaModel::Validate() const {
  const Eigen::Index d = mean.size();
  if (d < 1 || between.rows() != d || between.cols() != d ||
      within.rows() != d || within.cols() != d)
    throw NumericalError("plda: inconsistent model shapes");
  if (!mean.allFinite() || !between.allFinite() || !within.allFinite())
    throw NumericalError("plda: non-finite model parameters");
  Eigen::LLT<Eigen::MatrixXd> llt(within);
  if (llt.info() != Eigen::Success)
    throw NumericalError("plda: within covariance is not positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(between,
                                                     Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, between.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
    throw NumericalError("plda: between covariance is not PSD");
}

SpeakerGroups GroupRows(const Eigen::MatrixXd& rows,
                        std::span<const std::string> labels) {
  if (static_cast<std::size_t>(rows.rows()) != labels.size())
    throw DataError("plda: one label per embedding required");
  std::map<std::string_view, std::vector<Eigen::Index>> index;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    index[labels[static_cast<std::size_t>(i)]].push_back(i);
  SpeakerGroups groups;
  for (const auto& [label, members] : index) {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(members.size()), rows.cols());
    for (std::size_t k = 0; k < members.size(); ++k)
      g.row(static_cast<Eigen::Index>(k)) = rows.row(members[k]);
    groups.push_back(std::move(g));
  }
  return groups;
}

double PldaLogLikelihood(const PldaModel& model, const SpeakerGroups& groups) {
  return LogLikelihood(model, Summarize(groups));
}

PldaFitResult FitPlda(const SpeakerGroups& groups, const EmConfig& config) {
  if (config.iterations < 1) throw UsageError("plda: iterations must be >= 1");
  GroupStats stats = Summarize(groups);
  const Eigen::Index d = stats.scatter.rows();
  const double num_speakers = static_cast<double>(stats.speakers.size());
  if (stats.speakers.size() < 2)
    throw DataError("plda: need at least 2 speakers, got " +
                    std::to_string(stats.speakers.size()));
  bool repeated = false;
  for (const auto& s : stats.speakers) repeated = repeated || s.count >= 2.0;
  if (!repeated)
    throw DataError(
        "plda: within-speaker covariance unidentifiable (no speaker has two "
        "or more embeddings)");

  PldaModel model;
  model.mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : stats.speakers) model.mean += s.count * s.mean;
  model.mean /= stats.total;
  const double dof = std::max(1.0, stats.total - num_speakers);
  model.within = stats.scatter / dof;
  {
    const double trace = model.within.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.within,
                                                       Eigen::EigenvaluesOnly);
    if (trace <= 0.0) throw DataError("plda: zero within-speaker scatter");
    if (eig.eigenvalues().minCoeff() <= 1e-10 * trace / static_cast<double>(d)) {
      const double ridge = 1e-6 * trace / static_cast<double>(d);
      LogMessage(LogLevel::kWarning, "plda")
          << "rank-deficient within-speaker scatter; adding ridge " << ridge;
      model.within += ridge * Eigen::MatrixXd::Identity(d, d);
    }
  }
  model.between = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : stats.speakers) {
    Eigen::VectorXd diff = s.mean - model.mean;
    model.between.noalias() += diff * diff.transpose();
  }
  model.between /= num_speakers;

  PldaFitResult result;
  result.log_likelihoods.push_back(LogLikelihood(model, stats));
  for (int iter = 0; iter < config.iterations; ++iter) {
    // E-step: posterior of each speaker factor, shared gain per count.
    std::map<double, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> gain_cache;
    std::vector<Eigen::VectorXd> post_means;
    post_means.reserve(stats.speakers.size());
    Eigen::MatrixXd between_acc = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd within_acc = stats.scatter;
    Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(d);
    for (const auto& s : stats.speakers) {
      auto it = gain_cache.find(s.count);
      if (it == gain_cache.end()) {
        Eigen::LLT<Eigen::MatrixXd> llt(model.between + model.within / s.count);
        if (llt.info() != Eigen::Success)
          throw NumericalError("plda: E-step covariance not positive definite");
        // gain = B (B + W/n)^-1; posterior covariance = B - gain B.
        Eigen::MatrixXd gain = llt.solve(model.between).transpose();
        Eigen::MatrixXd cov = Symmetrize(model.between - gain * model.between);
        it = gain_cache.emplace(s.count, std::make_pair(gain, cov)).first;
      }
      const auto& [gain, cov] = it->second;
      Eigen::VectorXd m = gain * (s.mean - model.mean);
      between_acc.noalias() += m * m.transpose() + cov;
      mean_acc += s.count * (s.mean - m);
      post_means.push_back(std::move(m));
    }
    // M-step.
    PldaModel next;
    next.mean = mean_acc / stats.total;
    next.between = Symmetrize(between_acc / num_speakers);
    for (std::size_t i = 0; i < stats.speakers.size(); ++i) {
      const auto& s = stats.speakers[i];
      Eigen::VectorXd r = s.mean - next.mean - post_means[i];
      within_acc.noalias() +=
          s.count * (r * r.transpose() + gain_cache.at(s.count).second);
    }
    next.within = Symmetrize(within_acc / stats.total);
    try {
      next.Validate();
    } catch (const NumericalError& e) {
      throw NumericalError("plda: EM iteration " + std::to_string(iter) +
                           " produced an invalid model: " + e.what());
    }
    model = std::move(next);
    const double ll = LogLikelihood(model, stats);
    const double previous = result.log_likelihoods.back();
    result.log_likelihoods.push_back(ll);
    if (ll < previous - 1e-8 * std::max(1.0, std::abs(previous)))
      LogMessage(LogLevel::kWarning, "plda")
          << "log-likelihood decreased at iteration " << iter << ": "
          << previous << " -> " << ll;
    if ((ll - previous) / stats.total < config.tolerance) break;
  }
  result.model = std::move(model);
  return result;
}

PldaScorer::PldaScorer(const PldaModel& model) : mean_(model.mean) {
  model.Validate();
  const Eigen::Index d = model.dim();
  const Eigen::MatrixXd total = model.between + model.within;
  Eigen::MatrixXd same(2 * d, 2 * d);
  same << total, model.between, model.between, total;
  Eigen::LLT<Eigen::MatrixXd> same_llt(same);
  Eigen::LLT<Eigen::MatrixXd> total_llt(total);
  if (same_llt.info() != Eigen::Success || total_llt.info() != Eigen::Success)
    throw NumericalError("plda: scoring covariance not positive definite");
  const Eigen::MatrixXd same_inv =
      same_llt.solve(Eigen::MatrixXd::Identity(2 * d, 2 * d));
  const Eigen::MatrixXd total_inv = total_llt.solve(Eigen::MatrixXd::Identity(d, d));
  // same^-1 - diff^-1, averaged over the two (numerically equal) blocks.
  Eigen::MatrixXd top = same_inv.topLeftCorner(d, d) - total_inv;
  Eigen::MatrixXd bottom = same_inv.bottomRightCorner(d, d) - total_inv;
  diag_block_ = Symmetrize(0.5 * (top + bottom));
  cross_block_ = Symmetrize(0.5 * (same_inv.topRightCorner(d, d) +
                                   same_inv.bottomLeftCorner(d, d).transpose()));
  const double logdet_same =
      2.0 * same_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_diff =
      4.0 * total_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  constant_ = -0.5 * logdet_same + 0.5 * logdet_diff;
}

PldaScorer::Prepared PldaScorer::Prepare(const Eigen::VectorXd& embedding) const {
  if (embedding.size() != mean_.size())
    throw DataError("plda: embedding dim " + std::to_string(embedding.size()) +
                    " != model dim " + std::to_string(mean_.size()));
  Prepared p;
  p.centered = embedding - mean_;
  p.cross = cross_block_ * p.centered;
  p.quadratic = p.centered.dot(diag_block_ * p.centered);
  return p;
}

double PldaScorer::Score(const Prepared& a, const Prepared& b) const {
  return -0.5 * (a.quadratic + b.quadratic) - a.centered.dot(b.cross) + constant_;
}

double PldaScorer::Score(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return Score(Prepare(a), Prepare(b));
}

double PldaScore(const PldaModel& model, const Eigen::VectorXd& enrol,
                 const Eigen::VectorXd& test) {
  return PldaScorer(model).Score(enrol, test);
}

Eigen::VectorXd AverageAndNormalize(std::span<const Eigen::VectorXd> embeddings) {
  if (embeddings.empty()) throw DataError("enrolment: empty embedding list");
  Eigen::VectorXd mean = embeddings.front();
  for (std::size_t i = 1; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != mean.size())
      throw DataError("enrolment: inconsistent embedding dims");
    mean += embeddings[i];
  }
  mean /= static_cast<double>(embeddings.size());
  LengthNormalize(&mean);
  return mean;
}

double ScoreEnrolment(const PldaScorer& scorer,
                      std::span<const Eigen::VectorXd> enrolment,
                      const Eigen::VectorXd& test) {
  return scorer.Score(AverageAndNormalize(enrolment), test);
}

std::string EncodePlda(const PldaModel& model) {
  BinaryWriter w;
  w.PutMagic("SVP1");
  const Eigen::Index d = model.dim();
  w.PutU32(static_cast<std::uint32_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) w.PutF64(model.mean(i));
  for (const Eigen::MatrixXd* m : {&model.between, &model.within})
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) w.PutF64((*m)(r, c));
  return w.Release();
}

PldaModel DecodePlda(std::string_view bytes, const std::string& context) {
  BinaryReader r(bytes, context);
  r.ExpectMagic("SVP1");
  const std::uint32_t d = r.GetU32();
  r.Require((static_cast<std::size_t>(d) + 2 * static_cast<std::size_t>(d) * d) * 8,
            "plda payload");
  PldaModel model;
  model.mean.resize(d);
  for (std::uint32_t i = 0; i < d; ++i) model.mean(i) = r.GetF64();
  model.between.resize(d, d);
  model.within.resize(d, d);
  for (Eigen::MatrixXd* m : {&model.between, &model.within})
    for (std::uint32_t i = 0; i < d; ++i)
      for (std::uint32_t j = 0; j < d; ++j) (*m)(i, j) = r.GetF64();
  if (!r.AtEnd()) throw DataError(context + ": trailing bytes");
  model.Validate();
  return model;
}

PldaModel ReadPlda(const std::string& path) {
  return DecodePlda(ReadFileBytes(path), path);
}

void WritePlda(const std::string& path, const PldaModel& model) {
  WriteFileBytes(path, EncodePlda(model));
}

}  // namespace verifkit
