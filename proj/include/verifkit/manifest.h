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

#ifndef VERIFKIT_MANIFEST_H_
#define VERIFKIT_MANIFEST_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace verifkit {

enum class Gender { kMale, kFemale };

// Six-level CEFR grade as stored in manifests.
enum class Grade { kA1, kA2, kB1, kB2, kC1, kC2 };

// Five-level scale used for every comparison: C1 and C2 collapse into C.
// Declaration order is the total order A1 < A2 < B1 < B2 < C.
enum class MergedGrade { kA1, kA2, kB1, kB2, kC };

// Test sections. A and B are enrolment material; C, D and E are verified.
enum class Section { kA, kB, kC, kD, kE };

inline constexpr MergedGrade Merge(Grade grade) {
  return grade == Grade::kC2 ? MergedGrade::kC
                             : static_cast<MergedGrade>(grade);
}
inline constexpr MergedGrade Merge(MergedGrade grade) { return grade; }

inline constexpr bool IsEnrolmentSection(Section s) {
  return s == Section::kA || s == Section::kB;
}
inline constexpr bool IsVerificationSection(Section s) {
  return !IsEnrolmentSection(s);
}

// Case-insensitive "M"/"F".
std::optional<Gender> ParseGender(std::string_view token);
std::optional<Grade> ParseGrade(std::string_view token);
std::optional<MergedGrade> ParseMergedGrade(std::string_view token);
std::optional<Section> ParseSection(std::string_view token);

std::string_view ToString(Gender gender);
std::string_view ToString(Grade grade);
std::string_view ToString(MergedGrade grade);
std::string_view ToString(Section section);

// Leading/trailing whitespace removed.
std::string_view Trim(std::string_view text);

struct SpeakerRecord {
  std::string speaker_id;
  Gender gender = Gender::kMale;
  std::string l1;
  Grade grade = Grade::kA1;

  MergedGrade merged_grade() const { return Merge(grade); }
  bool operator==(const SpeakerRecord&) const = default;
};

struct RecordingRecord {
  std::string recording_id;
  std::string speaker_id;
  Section section = Section::kA;
  std::string source_path;

  bool operator==(const RecordingRecord&) const = default;
};

// Validated speaker and recording tables. Records are kept sorted by id, so
// equality is set equality. Immutable once built.
class Manifest {
 public:
  Manifest() = default;

  // Throws DataError on duplicate ids, empty fields, or a recording whose
  // speaker is absent.
  static Manifest Create(std::vector<SpeakerRecord> speakers,
                         std::vector<RecordingRecord> recordings);

  const std::vector<SpeakerRecord>& speakers() const { return speakers_; }
  const std::vector<RecordingRecord>& recordings() const { return recordings_; }

  const SpeakerRecord* FindSpeaker(std::string_view speaker_id) const;
  const RecordingRecord* FindRecording(std::string_view recording_id) const;
  // Speaker owning a recording; nullptr for unknown recording ids.
  const SpeakerRecord* SpeakerOf(std::string_view recording_id) const;

  bool empty() const { return speakers_.empty() && recordings_.empty(); }
  bool operator==(const Manifest& other) const {
    return speakers_ == other.speakers_ && recordings_ == other.recordings_;
  }

 private:
  std::vector<SpeakerRecord> speakers_;
  std::vector<RecordingRecord> recordings_;
};

// Tab-separated manifest text:
//   SPK<TAB>speaker_id<TAB>M|F<TAB>l1<TAB>grade
//   REC<TAB>recording_id<TAB>speaker_id<TAB>A|B|C|D|E<TAB>path
// '#' lines and blank lines are ignored. Errors name the offending line.
Manifest ParseManifest(std::string_view text);
std::string SerializeManifest(const Manifest& manifest);

Manifest ReadManifest(const std::string& path);
void WriteManifest(const std::string& path, const Manifest& manifest);

}  // namespace verifkit

#endif  // VERIFKIT_MANIFEST_H_
