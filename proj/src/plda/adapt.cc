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

#include <cmath>

#include "verifkit/error.h"
#include "verifkit/log.h"
#include "verifkit/plda.h"

namespace verifkit {

void AdaptConfig::Validate() const {
  if (!(alpha_within >= 0.0) || !(alpha_between >= 0.0) ||
      std::abs(alpha_within + alpha_between - 1.0) > 1e-12)
    throw DataError("adapt: alphas must be non-negative and sum to 1 (got " +
                    std::to_string(alpha_within) + ", " +
                    std::to_string(alpha_between) + ")");
}

PldaModel AdaptFromStats(const PldaModel& model,
                         const Eigen::VectorXd& adaptation_mean,
                         const Eigen::MatrixXd& adaptation_covariance,
                         const AdaptConfig& config) {
  config.Validate();
  model.Validate();
  const Eigen::Index d = model.dim();
  if (adaptation_mean.size() != d || adaptation_covariance.rows() != d ||
      adaptation_covariance.cols() != d)
    throw DataError("adapt: adaptation statistics have the wrong dimension");
  if (!adaptation_mean.allFinite() || !adaptation_covariance.allFinite())
    throw DataError("adapt: non-finite adaptation statistics");

  Eigen::MatrixXd covariance =
      0.5 * (adaptation_covariance + adaptation_covariance.transpose());
  const double trace = covariance.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(covariance,
                                                       Eigen::EigenvaluesOnly);
  if (trace <= 0.0 ||
      check.eigenvalues().minCoeff() <= 1e-10 * trace / static_cast<double>(d)) {
    const double ridge =
        1e-6 * (trace > 0.0 ? trace / static_cast<double>(d) : 1.0);
    LogMessage(LogLevel::kWarning, "adapt")
        << "rank-deficient adaptation covariance; adding ridge " << ridge;
    covariance += ridge * Eigen::MatrixXd::Identity(d, d);
  }

  // total = L L'; in the basis L^-1 the model total is the identity.
  const Eigen::MatrixXd total = model.between + model.within;
  Eigen::LLT<Eigen::MatrixXd> llt(total);
  if (llt.info() != Eigen::Success)
    throw NumericalError("adapt: model total covariance not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::MatrixXd whitened =
      llt.matrixL().solve(llt.matrixL().solve(covariance).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (whitened + whitened.transpose()));
  if (eig.info() != Eigen::Success)
    throw NumericalError("adapt: eigendecomposition failed");
  Eigen::VectorXd excess = (eig.eigenvalues().array() - 1.0).cwiseMax(0.0);
  // Excess variance mapped back: L U diag(excess) U' L'.
  const Eigen::MatrixXd back = lower * eig.eigenvectors();
  Eigen::MatrixXd added = back * excess.asDiagonal() * back.transpose();
  added = 0.5 * (added + added.transpose());

  PldaModel adapted;
  adapted.mean = adaptation_mean;
  adapted.between = model.between + config.alpha_between * added;
  adapted.within = model.within + config.alpha_within * added;
  adapted.Validate();
  return adapted;
}

PldaModel Adapt(const PldaModel& model, const Eigen::MatrixXd& rows,
                const AdaptConfig& config) {
  const Eigen::Index n = rows.rows(), d = rows.cols();
  if (d != model.dim())
    throw DataError("adapt: embedding dim " + std::to_string(d) +
                    " != model dim " + std::to_string(model.dim()));
  if (n < d + 1)
    throw DataError("adapt: need at least d + 1 = " + std::to_string(d + 1) +
                    " adaptation embeddings, got " + std::to_string(n));
  Eigen::VectorXd mean = rows.colwise().mean().transpose();
  Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
  Eigen::MatrixXd covariance =
      (centered.transpose() * centered) / static_cast<double>(n);
  return AdaptFromStats(model, mean, covariance, config);
}

}  // namespace verifkit
