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

#ifndef VERIFKIT_EVAL_H_
#define VERIFKIT_EVAL_H_

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verifkit/manifest.h"
#include "verifkit/trials.h"

namespace verifkit {

struct ScoreSet {
  std::vector<Trial> trials;
  std::vector<double> scores;

  std::size_t size() const { return trials.size(); }
  void Add(const Trial& trial, double score) {
    trials.push_back(trial);
    scores.push_back(score);
  }
  std::vector<TrialLabel> Labels() const;
  // Throws DataError on length mismatch or a non-finite score.
  void Validate() const;
};

ScoreSet ParseScores(std::string_view text, const std::string& context = "scores");
ScoreSet ReadScores(const std::string& path);
std::string SerializeScores(const ScoreSet& set);
void WriteScores(const std::string& path, const ScoreSet& set);

struct DetPoint {
  double threshold = 0.0;
  double fa = 0.0;
  double miss = 0.0;
};

// Ordered by increasing threshold. The first point sits at -inf (FA 1,
// MISS 0), the last at +inf (FA 0, MISS 1); in between one point per
// distinct score. Acceptance is score >= threshold.
using DetCurve = std::vector<DetPoint>;

// Throws DataError when either class is empty or sizes differ.
DetCurve ComputeDet(std::span<const double> scores,
                    std::span<const TrialLabel> labels);
DetCurve ComputeDet(const ScoreSet& set);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Linear interpolation between the adjacent DET points where FA - MISS
// changes sign.
EerResult ComputeEer(const DetCurve& curve);
EerResult ComputeEer(const ScoreSet& set);

// "threshold<TAB>fa<TAB>miss" per line.
std::string FormatDet(const DetCurve& curve);

enum class BreakdownAttribute { kGrade, kL1 };
std::string_view ToString(BreakdownAttribute attribute);
// "grade" or "l1"; throws UsageError otherwise.
BreakdownAttribute ParseBreakdownAttribute(std::string_view text);

std::string AttributeValue(const SpeakerRecord& speaker,
                           BreakdownAttribute attribute);

struct FaBreakdown {
  BreakdownAttribute attribute = BreakdownAttribute::kGrade;
  // Attribute values present among the manifest's speakers; grades in scale
  // order, L1s sorted.
  std::vector<std::string> values;
  // counts[row][col]: false alarms with reference value `row` and impostor
  // value `col`.
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> row_totals;
  std::uint64_t total = 0;

  bool empty() const { return total == 0; }
  // Percentage of the row's false alarms; 0 for empty rows.
  double Percent(std::size_t row, std::size_t col) const;
};

// Streaming form of ComputeFaBreakdown. The manifest must outlive it.
class FaBreakdownAccumulator {
 public:
  FaBreakdownAccumulator(const Manifest& manifest, BreakdownAttribute attribute,
                         double threshold);
  void Add(const Trial& trial, double score);
  const FaBreakdown& result() const { return result_; }

 private:
  const Manifest& manifest_;
  double threshold_;
  FaBreakdown result_;
  std::map<std::string, std::size_t> index_;
};

// Nontarget trials scoring >= threshold, tallied by reference and impostor
// attribute. Throws DataError for speakers or recordings absent from the
// manifest, UsageError for a non-finite threshold.
FaBreakdown ComputeFaBreakdown(const ScoreSet& set, const Manifest& manifest,
                               BreakdownAttribute attribute, double threshold);

// Tab-separated percentage matrix with a header row and a header column of
// attribute values, two decimals; empty rows print "-".
std::string FormatBreakdown(const FaBreakdown& breakdown);

inline constexpr double kDefaultFusionWeightA = 0.7;
inline constexpr double kDefaultFusionWeightB = 0.3;

// Elementwise weight_a * a + weight_b * b; sizes must agree.
std::vector<double> FuseScores(std::span<const double> a,
                               std::span<const double> b, double weight_a,
                               double weight_b);

// Per trial weight_a * a + weight_b * b. Throws DataError naming the first
// differing trial when the lists disagree.
ScoreSet Fuse(const ScoreSet& a, const ScoreSet& b,
              double weight_a = kDefaultFusionWeightA,
              double weight_b = kDefaultFusionWeightB);

struct SampleResult {
  Manifest manifest;
  std::vector<std::string> warnings;
};

// Per attribute group, up to n_per_group speakers: n/2 per gender, the
// shortfall of one gender borrowed from the other. Groups smaller than
// n_per_group are taken whole with a warning. The subset keeps all of the
// chosen speakers' recordings.
SampleResult StratifiedSample(const Manifest& manifest,
                              BreakdownAttribute group, int n_per_group,
                              std::uint64_t seed);

}  // namespace verifkit

#endif  // VERIFKIT_EVAL_H_
