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
#include <cstdio>
#include <set>

#include "verifkit/error.h"
#include "verifkit/eval.h"

namespace verifkit {

std::string_view ToString(BreakdownAttribute attribute) {
  return attribute == BreakdownAttribute::kGrade ? "grade" : "l1";
}

BreakdownAttribute ParseBreakdownAttribute(std::string_view text) {
  if (text == "grade") return BreakdownAttribute::kGrade;
  if (text == "l1" || text == "L1") return BreakdownAttribute::kL1;
  throw UsageError("unknown attribute \"" + std::string(text) +
                   "\" (expected grade or l1)");
}

std::string AttributeValue(const SpeakerRecord& speaker,
                           BreakdownAttribute attribute) {
  if (attribute == BreakdownAttribute::kGrade)
    return std::string(ToString(speaker.merged_grade()));
  return speaker.l1;
}

double FaBreakdown::Percent(std::size_t row, std::size_t col) const {
  if (row_totals[row] == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[row][col]) /
         static_cast<double>(row_totals[row]);
}

FaBreakdownAccumulator::FaBreakdownAccumulator(const Manifest& manifest,
                                               BreakdownAttribute attribute,
                                               double threshold)
    : manifest_(manifest), threshold_(threshold) {
  if (!std::isfinite(threshold))
    throw UsageError("breakdown: threshold must be finite");
  result_.attribute = attribute;
  if (attribute == BreakdownAttribute::kGrade) {
    std::set<MergedGrade> present;
    for (const auto& s : manifest.speakers()) present.insert(s.merged_grade());
    for (MergedGrade g : present) result_.values.emplace_back(ToString(g));
  } else {
    std::set<std::string> present;
    for (const auto& s : manifest.speakers()) present.insert(s.l1);
    result_.values.assign(present.begin(), present.end());
  }
  for (std::size_t i = 0; i < result_.values.size(); ++i)
    index_[result_.values[i]] = i;
  result_.counts.assign(result_.values.size(),
                        std::vector<std::uint64_t>(result_.values.size(), 0));
  result_.row_totals.assign(result_.values.size(), 0);
}

void FaBreakdownAccumulator::Add(const Trial& trial, double score) {
  if (trial.label != TrialLabel::kNontarget || score < threshold_) return;
  const SpeakerRecord* ref = manifest_.FindSpeaker(trial.enrol_speaker_id);
  if (!ref)
    throw DataError("breakdown: speaker " + trial.enrol_speaker_id +
                    " missing from manifest");
  const SpeakerRecord* imp = manifest_.SpeakerOf(trial.verify_recording_id);
  if (!imp)
    throw DataError("breakdown: recording " + trial.verify_recording_id +
                    " missing from manifest");
  const std::size_t r = index_.at(AttributeValue(*ref, result_.attribute));
  const std::size_t c = index_.at(AttributeValue(*imp, result_.attribute));
  ++result_.counts[r][c];
  ++result_.row_totals[r];
  ++result_.total;
}

FaBreakdown ComputeFaBreakdown(const ScoreSet& set, const Manifest& manifest,
                               BreakdownAttribute attribute, double threshold) {
  set.Validate();
  FaBreakdownAccumulator accumulator(manifest, attribute, threshold);
  for (std::size_t i = 0; i < set.size(); ++i)
    accumulator.Add(set.trials[i], set.scores[i]);
  return accumulator.result();
}

std::string FormatBreakdown(const FaBreakdown& breakdown) {
  std::string out = std::string(ToString(breakdown.attribute));
  for (const auto& v : breakdown.values) out += '\t' + v;
  out += '\n';
  char cell[32];
  for (std::size_t r = 0; r < breakdown.values.size(); ++r) {
    out += breakdown.values[r];
    for (std::size_t c = 0; c < breakdown.values.size(); ++c) {
      if (breakdown.row_totals[r] == 0) {
        out += "\t-";
        continue;
      }
      std::snprintf(cell, sizeof(cell), "\t%.2f", breakdown.Percent(r, c));
      out += cell;
    }
    out += '\n';
  }
  return out;
}

}  // namespace verifkit
