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

// Reference implementations used only as test oracles. Each one is written
// directly from the definition, with no shared code from the library.

#ifndef VERIFKIT_TESTS_ORACLES_H_
#define VERIFKIT_TESTS_ORACLES_H_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "verifkit/manifest.h"
#include "verifkit/plda.h"

namespace verifkit::testing {

// LLR by integrating the speaker factor out on a grid, for d = 1 or 2. The
// grid is laid out in whitened prior coordinates y = L u, so p(y) dy becomes
// a standard normal in u.
inline double QuadratureLlr(const PldaModel& m, const Eigen::VectorXd& e1,
                            const Eigen::VectorXd& e2, double half_width = 9.0,
                            int points = 1201) {
  const int d = m.dim();
  Eigen::LLT<Eigen::MatrixXd> llt(m.between);
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::MatrixXd precision = m.within.inverse();
  const double norm = 1.0 / std::sqrt(std::pow(2 * std::numbers::pi, d) * m.within.determinant());
  auto density = [&](const Eigen::VectorXd& x) {
    return norm * std::exp(-0.5 * x.dot(precision * x));
  };
  const double h = 2 * half_width / (points - 1);
  double same = 0.0, marg1 = 0.0, marg2 = 0.0;
  auto visit = [&](const Eigen::VectorXd& u) {
    const double prior = std::exp(-0.5 * u.squaredNorm()) / std::pow(2 * std::numbers::pi, 0.5 * d);
    const Eigen::VectorXd y = lower * u;
    const double p1 = density(e1 - m.mean - y);
    const double p2 = density(e2 - m.mean - y);
    same += p1 * p2 * prior;
    marg1 += p1 * prior;
    marg2 += p2 * prior;
  };
  Eigen::VectorXd u(d);
  for (int i = 0; i < points; ++i) {
    u(0) = -half_width + h * i;
    if (d == 1) {
      visit(u);
      continue;
    }
    for (int j = 0; j < points; ++j) {
      u(1) = -half_width + h * j;
      visit(u);
    }
  }
  // Riemann sums; each integral carries one cell volume.
  const double cell = std::pow(h, d);
  return std::log(same * cell) - std::log(marg1 * cell) - std::log(marg2 * cell);
}

// Closed form at e1 = e2 = mu from explicit 2d x 2d block determinants.
inline double LlrAtMeanByDeterminants(const PldaModel& m) {
  const int d = m.dim();
  const Eigen::MatrixXd total = m.between + m.within;
  Eigen::MatrixXd same(2 * d, 2 * d), diff = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  same << total, m.between, m.between, total;
  diff.topLeftCorner(d, d) = total;
  diff.bottomRightCorner(d, d) = total;
  return 0.5 * std::log(Eigen::FullPivLU<Eigen::MatrixXd>(diff).determinant()) -
         0.5 * std::log(Eigen::FullPivLU<Eigen::MatrixXd>(same).determinant());
}

using TrialTuple = std::tuple<std::string, std::string, bool>;  // enrol, verify, target

struct BruteForceFlags {
  bool gender = false, l1 = false, grade_equal = false, grade_higher = false;
};

// Nested loops over every (speaker, recording) pair, sorted at the end.
inline std::vector<TrialTuple> BruteForceTrials(const Manifest& m, const BruteForceFlags& f) {
  std::vector<TrialTuple> out;
  for (const auto& ref : m.speakers()) {
    const int ref_grade = ref.grade == Grade::kC2 ? 4 : static_cast<int>(ref.grade);
    for (const auto& rec : m.recordings()) {
      if (rec.section == Section::kA || rec.section == Section::kB) continue;
      if (rec.speaker_id == ref.speaker_id) {
        out.emplace_back(ref.speaker_id, rec.recording_id, true);
        continue;
      }
      const SpeakerRecord* imp = nullptr;
      for (const auto& s : m.speakers())
        if (s.speaker_id == rec.speaker_id) imp = &s;
      const int imp_grade = imp->grade == Grade::kC2 ? 4 : static_cast<int>(imp->grade);
      if (f.gender && imp->gender != ref.gender) continue;
      if (f.l1 && imp->l1 != ref.l1) continue;
      if (f.grade_equal && imp_grade != ref_grade) continue;
      if (f.grade_higher) {
        const bool ok = ref_grade == 4 ? imp_grade == 4 : imp_grade > ref_grade;
        if (!ok) continue;
      }
      out.emplace_back(ref.speaker_id, rec.recording_id, false);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// False-alarm and miss rates at one threshold, recounted from scratch.
inline std::pair<double, double> RecountRates(const std::vector<double>& scores,
                                              const std::vector<bool>& is_target,
                                              double threshold) {
  double fa = 0, miss = 0, nt = 0, tg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (is_target[i]) {
      ++tg;
      if (scores[i] < threshold) ++miss;
    } else {
      ++nt;
      if (scores[i] >= threshold) ++fa;
    }
  }
  return {fa / nt, miss / tg};
}

}  // namespace verifkit::testing

#endif  // VERIFKIT_TESTS_ORACLES_H_
