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

#include "verifkit/manifest.h"

#include <algorithm>
#include <cctype>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"

namespace verifkit {

namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool IsValidId(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  });
}

}  // namespace

std::string_view Trim(std::string_view text) {
  auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::optional<Gender> ParseGender(std::string_view token) {
  if (token.size() != 1) return std::nullopt;
  char c = static_cast<char>(std::toupper(static_cast<unsigned char>(token[0])));
  if (c == 'M') return Gender::kMale;
  if (c == 'F') return Gender::kFemale;
  return std::nullopt;
}

std::optional<Grade> ParseGrade(std::string_view token) {
  static constexpr std::string_view kNames[] = {"A1", "A2", "B1",
                                                "B2", "C1", "C2"};
  for (int i = 0; i < 6; ++i)
    if (token == kNames[i]) return static_cast<Grade>(i);
  return std::nullopt;
}

std::optional<MergedGrade> ParseMergedGrade(std::string_view token) {
  if (token == "C") return MergedGrade::kC;
  if (auto grade = ParseGrade(token)) return Merge(*grade);
  return std::nullopt;
}

std::optional<Section> ParseSection(std::string_view token) {
  if (token.size() != 1 || token[0] < 'A' || token[0] > 'E')
    return std::nullopt;
  return static_cast<Section>(token[0] - 'A');
}

std::string_view ToString(Gender gender) {
  return gender == Gender::kMale ? "M" : "F";
}

std::string_view ToString(Grade grade) {
  static constexpr std::string_view kNames[] = {"A1", "A2", "B1",
                                                "B2", "C1", "C2"};
  return kNames[static_cast<int>(grade)];
}

std::string_view ToString(MergedGrade grade) {
  static constexpr std::string_view kNames[] = {"A1", "A2", "B1", "B2", "C"};
  return kNames[static_cast<int>(grade)];
}

std::string_view ToString(Section section) {
  static constexpr std::string_view kNames[] = {"A", "B", "C", "D", "E"};
  return kNames[static_cast<int>(section)];
}

Manifest Manifest::Create(std::vector<SpeakerRecord> speakers,
                          std::vector<RecordingRecord> recordings) {
  Manifest m;
  m.speakers_ = std::move(speakers);
  m.recordings_ = std::move(recordings);
  std::sort(m.speakers_.begin(), m.speakers_.end(),
            [](const auto& a, const auto& b) {
              return a.speaker_id < b.speaker_id;
            });
  std::sort(m.recordings_.begin(), m.recordings_.end(),
            [](const auto& a, const auto& b) {
              return a.recording_id < b.recording_id;
            });
  for (std::size_t i = 0; i < m.speakers_.size(); ++i) {
    const auto& s = m.speakers_[i];
    if (!IsValidId(s.speaker_id))
      throw DataError("invalid speaker id \"" + s.speaker_id + "\"");
    if (Trim(s.l1).empty() || Trim(s.l1) != s.l1)
      throw DataError("speaker " + s.speaker_id + ": invalid L1 \"" + s.l1 +
                      "\"");
    if (i > 0 && m.speakers_[i - 1].speaker_id == s.speaker_id)
      throw DataError("duplicate speaker id " + s.speaker_id);
  }
  for (std::size_t i = 0; i < m.recordings_.size(); ++i) {
    const auto& r = m.recordings_[i];
    if (!IsValidId(r.recording_id))
      throw DataError("invalid recording id \"" + r.recording_id + "\"");
    if (i > 0 && m.recordings_[i - 1].recording_id == r.recording_id)
      throw DataError("duplicate recording id " + r.recording_id);
    if (r.source_path.empty() || r.source_path.find('\t') != std::string::npos ||
        r.source_path.find('\n') != std::string::npos)
      throw DataError("recording " + r.recording_id + ": invalid path");
  }
  for (const auto& r : m.recordings_) {
    if (m.FindSpeaker(r.speaker_id) == nullptr)
      throw DataError("recording " + r.recording_id +
                      " references unknown speaker " + r.speaker_id);
  }
  return m;
}

const SpeakerRecord* Manifest::FindSpeaker(std::string_view speaker_id) const {
  auto it = std::lower_bound(
      speakers_.begin(), speakers_.end(), speaker_id,
      [](const SpeakerRecord& s, std::string_view id) { return s.speaker_id < id; });
  return it != speakers_.end() && it->speaker_id == speaker_id ? &*it : nullptr;
}

const RecordingRecord* Manifest::FindRecording(
    std::string_view recording_id) const {
  auto it = std::lower_bound(recordings_.begin(), recordings_.end(),
                             recording_id,
                             [](const RecordingRecord& r, std::string_view id) {
                               return r.recording_id < id;
                             });
  return it != recordings_.end() && it->recording_id == recording_id ? &*it
                                                                     : nullptr;
}

const SpeakerRecord* Manifest::SpeakerOf(std::string_view recording_id) const {
  const RecordingRecord* r = FindRecording(recording_id);
  return r == nullptr ? nullptr : FindSpeaker(r->speaker_id);
}

Manifest ParseManifest(std::string_view text) {
  std::vector<SpeakerRecord> speakers;
  std::vector<RecordingRecord> recordings;
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    std::size_t newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view()
                                             : text.substr(newline + 1);
    if (Trim(line).empty() || line.front() == '#') continue;

    auto fail = [&](const std::string& why) -> DataError {
      return DataError("manifest line " + std::to_string(line_number) + ": " +
                       why);
    };
    auto fields = SplitTabs(line);
    if (fields[0] == "SPK") {
      if (fields.size() != 5)
        throw fail("expected 5 tab-separated fields for SPK, got " +
                   std::to_string(fields.size()));
      SpeakerRecord s;
      s.speaker_id = std::string(fields[1]);
      auto gender = ParseGender(Trim(fields[2]));
      if (!gender) throw fail("unknown gender \"" + std::string(fields[2]) + "\"");
      s.gender = *gender;
      s.l1 = std::string(Trim(fields[3]));
      if (s.l1.empty()) throw fail("empty L1");
      auto grade = ParseGrade(Trim(fields[4]));
      if (!grade) throw fail("unknown grade \"" + std::string(fields[4]) + "\"");
      s.grade = *grade;
      if (!IsValidId(s.speaker_id)) throw fail("invalid speaker id");
      speakers.push_back(std::move(s));
    } else if (fields[0] == "REC") {
      if (fields.size() != 5)
        throw fail("expected 5 tab-separated fields for REC, got " +
                   std::to_string(fields.size()));
      RecordingRecord r;
      r.recording_id = std::string(fields[1]);
      r.speaker_id = std::string(fields[2]);
      auto section = ParseSection(Trim(fields[3]));
      if (!section)
        throw fail("unknown section \"" + std::string(fields[3]) + "\"");
      r.section = *section;
      r.source_path = std::string(fields[4]);
      if (!IsValidId(r.recording_id)) throw fail("invalid recording id");
      if (r.source_path.empty()) throw fail("empty path");
      recordings.push_back(std::move(r));
    } else {
      throw fail("unknown record type \"" + std::string(fields[0]) + "\"");
    }
  }
  return Manifest::Create(std::move(speakers), std::move(recordings));
}

std::string SerializeManifest(const Manifest& manifest) {
  std::string out;
  for (const auto& s : manifest.speakers()) {
    out += "SPK\t" + s.speaker_id + '\t' + std::string(ToString(s.gender)) +
           '\t' + s.l1 + '\t' + std::string(ToString(s.grade)) + '\n';
  }
  for (const auto& r : manifest.recordings()) {
    out += "REC\t" + r.recording_id + '\t' + r.speaker_id + '\t' +
           std::string(ToString(r.section)) + '\t' + r.source_path + '\n';
  }
  return out;
}

Manifest ReadManifest(const std::string& path) {
  try {
    return ParseManifest(ReadFileBytes(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void WriteManifest(const std::string& path, const Manifest& manifest) {
  WriteFileBytes(path, SerializeManifest(manifest));
}

}  // namespace verifkit
