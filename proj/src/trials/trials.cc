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

#include "verifkit/trials.h"

#include <charconv>
#include <fstream>
#include <ostream>
#include <tuple>

#include "verifkit/error.h"

namespace verifkit {

RestrictionSet RestrictionSet::Parse(std::string_view text) {
  RestrictionSet r;
  text = Trim(text);
  if (text.empty() || text == "none") return r;
  while (true) {
    std::size_t comma = text.find(',');
    std::string_view token = Trim(text.substr(0, comma));
    if (token == "gender")
      r.gender = true;
    else if (token == "l1" || token == "L1")
      r.l1 = true;
    else if (token == "grade")
      r.grade_equal = true;
    else if (token == "grade-higher" || token == ">grade")
      r.grade_higher = true;
    else
      throw UsageError("unknown restriction \"" + std::string(token) + "\"");
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  r.Validate();
  return r;
}

std::string RestrictionSet::ToString() const {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (gender) add("gender");
  if (l1) add("l1");
  if (grade_equal) add("grade");
  if (grade_higher) add("grade-higher");
  return out.empty() ? "none" : out;
}

void RestrictionSet::Validate() const {
  if (grade_equal && grade_higher)
    throw UsageError("restrictions grade and grade-higher are exclusive");
}

std::vector<NamedRestriction> StandardRestrictionRows() {
  RestrictionSet g;
  g.gender = true;
  RestrictionSet g_grade = g, g_higher = g, g_l1 = g;
  g_grade.grade_equal = true;
  g_higher.grade_higher = true;
  g_l1.l1 = true;
  RestrictionSet g_l1_grade = g_l1, g_l1_higher = g_l1;
  g_l1_grade.grade_equal = true;
  g_l1_higher.grade_higher = true;
  return {{"gender", g},
          {"gender+grade", g_grade},
          {"gender+>grade", g_higher},
          {"gender+L1", g_l1},
          {"gender+L1+grade", g_l1_grade},
          {"gender+L1+>grade", g_l1_higher}};
}

bool ImpostorAllowed(const SpeakerRecord& reference,
                     const SpeakerRecord& impostor,
                     const RestrictionSet& restrictions) {
  if (restrictions.gender && impostor.gender != reference.gender) return false;
  if (restrictions.l1 && impostor.l1 != reference.l1) return false;
  const MergedGrade ref = reference.merged_grade();
  const MergedGrade imp = impostor.merged_grade();
  if (restrictions.grade_equal && imp != ref) return false;
  if (restrictions.grade_higher) {
    if (ref == MergedGrade::kC) return imp == MergedGrade::kC;
    return imp > ref;
  }
  return true;
}

std::string_view ToString(TrialLabel label) {
  return label == TrialLabel::kTarget ? "target" : "nontarget";
}

TrialGenerator::TrialGenerator(const Manifest& manifest,
                               const RestrictionSet& restrictions)
    : manifest_(manifest), restrictions_(restrictions) {
  restrictions_.Validate();
  for (const auto& r : manifest.recordings()) {
    if (!IsVerificationSection(r.section)) continue;
    verify_.push_back(&r);
    verify_owner_.push_back(manifest.FindSpeaker(r.speaker_id));
  }
}

void TrialGenerator::Reset() {
  speaker_pos_ = 0;
  recording_pos_ = 0;
}

bool TrialGenerator::Next(Trial* trial) {
  const auto& speakers = manifest_.speakers();
  while (speaker_pos_ < speakers.size()) {
    const SpeakerRecord& ref = speakers[speaker_pos_];
    while (recording_pos_ < verify_.size()) {
      const std::size_t i = recording_pos_++;
      const SpeakerRecord* owner = verify_owner_[i];
      TrialLabel label;
      if (owner == &ref)
        label = TrialLabel::kTarget;
      else if (ImpostorAllowed(ref, *owner, restrictions_))
        label = TrialLabel::kNontarget;
      else
        continue;
      trial->enrol_speaker_id = ref.speaker_id;
      trial->verify_recording_id = verify_[i]->recording_id;
      trial->label = label;
      return true;
    }
    ++speaker_pos_;
    recording_pos_ = 0;
  }
  return false;
}

TrialCounts CountTrials(const Manifest& manifest,
                        const RestrictionSet& restrictions) {
  restrictions.Validate();
  // Verification recordings per (gender, L1, merged grade) bucket and per
  // speaker.
  using Bucket = std::tuple<Gender, std::string, MergedGrade>;
  std::map<Bucket, std::uint64_t> per_bucket;
  std::map<std::string_view, std::uint64_t> per_speaker;
  for (const auto& r : manifest.recordings()) {
    if (!IsVerificationSection(r.section)) continue;
    const SpeakerRecord* s = manifest.FindSpeaker(r.speaker_id);
    ++per_bucket[Bucket{s->gender, s->l1, s->merged_grade()}];
    ++per_speaker[s->speaker_id];
  }
  TrialCounts counts;
  for (const auto& ref : manifest.speakers()) {
    auto own_it = per_speaker.find(ref.speaker_id);
    const std::uint64_t own = own_it == per_speaker.end() ? 0 : own_it->second;
    counts.targets += own;
    std::uint64_t admitted = 0;
    SpeakerRecord probe;
    for (const auto& [bucket, count] : per_bucket) {
      probe.gender = std::get<0>(bucket);
      probe.l1 = std::get<1>(bucket);
      probe.grade = std::get<2>(bucket) == MergedGrade::kC
                        ? Grade::kC1
                        : static_cast<Grade>(std::get<2>(bucket));
      if (ImpostorAllowed(ref, probe, restrictions)) admitted += count;
    }
    // The reference's own recordings sit in its own bucket.
    if (ImpostorAllowed(ref, ref, restrictions)) admitted -= own;
    counts.nontargets += admitted;
  }
  return counts;
}

std::string FormatTrial(const Trial& trial) {
  return trial.enrol_speaker_id + '\t' + trial.verify_recording_id + '\t' +
         std::string(ToString(trial.label));
}

Trial ParseTrialLine(std::string_view line) {
  std::size_t t1 = line.find('\t');
  std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos)
    throw DataError("trial line needs 3 tab-separated fields: \"" +
                    std::string(line) + "\"");
  std::string_view label = line.substr(t2 + 1);
  std::size_t t3 = label.find('\t');
  if (t3 != std::string_view::npos) label = label.substr(0, t3);
  Trial trial;
  trial.enrol_speaker_id = std::string(line.substr(0, t1));
  trial.verify_recording_id = std::string(line.substr(t1 + 1, t2 - t1 - 1));
  if (label == "target")
    trial.label = TrialLabel::kTarget;
  else if (label == "nontarget")
    trial.label = TrialLabel::kNontarget;
  else
    throw DataError("trial label must be target or nontarget, got \"" +
                    std::string(label) + "\"");
  if (trial.enrol_speaker_id.empty() || trial.verify_recording_id.empty())
    throw DataError("trial line has an empty id");
  return trial;
}

std::uint64_t WriteTrials(std::ostream& out, TrialGenerator* generator) {
  Trial trial;
  std::uint64_t n = 0;
  while (generator->Next(&trial)) {
    out << FormatTrial(trial) << '\n';
    ++n;
  }
  return n;
}

std::vector<Trial> ReadTrials(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      trials.push_back(ParseTrialLine(line));
    } catch (const DataError& e) {
      throw DataError(path + " line " + std::to_string(line_number) + ": " +
                      e.what());
    }
  }
  return trials;
}

std::string FormatScore(double score) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), score);
  return std::string(buffer, ptr);
}

std::string FormatScoreLine(const Trial& trial, double score) {
  return FormatTrial(trial) + '\t' + FormatScore(score);
}

}  // namespace verifkit
