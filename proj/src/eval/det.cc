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
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"
#include "verifkit/eval.h"

namespace verifkit {

std::vector<TrialLabel> ScoreSet::Labels() const {
  std::vector<TrialLabel> labels;
  labels.reserve(trials.size());
  for (const auto& t : trials) labels.push_back(t.label);
  return labels;
}

void ScoreSet::Validate() const {
  if (trials.size() != scores.size())
    throw DataError("score set has " + std::to_string(trials.size()) +
                    " trials but " + std::to_string(scores.size()) + " scores");
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i]))
      throw DataError("non-finite score for trial " + FormatTrial(trials[i]));
}

ScoreSet ParseScores(std::string_view text, const std::string& context) {
  ScoreSet set;
  std::size_t line_number = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      return DataError(context + " line " + std::to_string(line_number) + ": " +
                       why);
    };
    std::size_t tab = line.rfind('\t');
    if (tab == std::string_view::npos) throw fail("expected 4 tab-separated fields");
    Trial trial;
    try {
      trial = ParseTrialLine(line.substr(0, tab));
    } catch (const DataError& e) {
      throw fail(e.what());
    }
    std::string_view field = line.substr(tab + 1);
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), score);
    if (ec != std::errc() || ptr != field.data() + field.size() ||
        !std::isfinite(score))
      throw fail("bad score \"" + std::string(field) + "\"");
    set.Add(trial, score);
  }
  return set;
}

ScoreSet ReadScores(const std::string& path) {
  return ParseScores(ReadFileBytes(path), path);
}

std::string SerializeScores(const ScoreSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    out += FormatScoreLine(set.trials[i], set.scores[i]);
    out += '\n';
  }
  return out;
}

void WriteScores(const std::string& path, const ScoreSet& set) {
  WriteFileBytes(path, SerializeScores(set));
}

DetCurve ComputeDet(std::span<const double> scores,
                    std::span<const TrialLabel> labels) {
  if (scores.size() != labels.size())
    throw DataError("det: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  std::uint64_t n_target = 0, n_nontarget = 0;
  for (TrialLabel l : labels) (l == TrialLabel::kTarget ? n_target : n_nontarget)++;
  if (n_target == 0 || n_nontarget == 0)
    throw DataError("det: need at least one target and one nontarget score");
  for (double s : scores)
    if (!std::isfinite(s)) throw DataError("det: non-finite score");

  const double inf = std::numeric_limits<double>::infinity();
  const double nt = static_cast<double>(n_target);
  const double nn = static_cast<double>(n_nontarget);
  DetCurve curve;
  curve.push_back({-inf, 1.0, 0.0});
  // Counts of each class strictly below the current threshold.
  std::uint64_t target_below = 0, nontarget_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    curve.push_back({threshold, (nn - nontarget_below) / nn, target_below / nt});
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == TrialLabel::kTarget ? target_below : nontarget_below)++;
      ++i;
    }
  }
  curve.push_back({inf, 0.0, 1.0});
  return curve;
}

DetCurve ComputeDet(const ScoreSet& set) {
  set.Validate();
  std::vector<TrialLabel> labels = set.Labels();
  return ComputeDet(set.scores, labels);
}

EerResult ComputeEer(const DetCurve& curve) {
  if (curve.size() < 2) throw DataError("eer: DET curve too short");
  for (std::size_t k = 1; k < curve.size(); ++k) {
    const DetPoint& hi = curve[k];
    const double d_hi = hi.fa - hi.miss;
    if (d_hi > 0.0) continue;
    if (d_hi == 0.0) return {hi.fa, hi.threshold};
    const DetPoint& lo = curve[k - 1];
    const double d_lo = lo.fa - lo.miss;
    const double t = d_lo / (d_lo - d_hi);
    EerResult r;
    r.eer = lo.fa + t * (hi.fa - lo.fa);
    if (!std::isfinite(lo.threshold))
      r.threshold = hi.threshold;
    else if (!std::isfinite(hi.threshold))
      r.threshold = lo.threshold;
    else
      r.threshold = lo.threshold + t * (hi.threshold - lo.threshold);
    return r;
  }
  throw DataError("eer: DET curve never crosses");
}

EerResult ComputeEer(const ScoreSet& set) { return ComputeEer(ComputeDet(set)); }

std::string FormatDet(const DetCurve& curve) {
  std::string out;
  for (const auto& p : curve) {
    out += FormatScore(p.threshold);
    out += '\t';
    out += FormatScore(p.fa);
    out += '\t';
    out += FormatScore(p.miss);
    out += '\n';
  }
  return out;
}

}  // namespace verifkit
