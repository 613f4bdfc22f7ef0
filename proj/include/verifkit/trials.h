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

#ifndef VERIFKIT_TRIALS_H_
#define VERIFKIT_TRIALS_H_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "verifkit/manifest.h"
#include "verifkit/matrix_io.h"
#include "verifkit/plda.h"
#include "verifkit/preprocess.h"

namespace verifkit {

// Which impostors are admitted for a reference speaker. Flags combine by
// intersection.
struct RestrictionSet {
  bool gender = false;
  bool l1 = false;
  bool grade_equal = false;
  // Strictly higher merged grade, or C when the reference is C.
  bool grade_higher = false;

  // Comma-separated subset of gender, l1, grade, grade-higher (">grade" is
  // accepted as an alias). Empty or "none" disables all flags. Throws
  // UsageError on unknown tokens or grade together with grade-higher.
  static RestrictionSet Parse(std::string_view text);
  std::string ToString() const;
  void Validate() const;
  bool operator==(const RestrictionSet&) const = default;
};

struct NamedRestriction {
  std::string name;
  RestrictionSet restrictions;
};

// gender, +grade, +>grade, +L1, +L1+grade, +L1+>grade.
std::vector<NamedRestriction> StandardRestrictionRows();

bool ImpostorAllowed(const SpeakerRecord& reference,
                     const SpeakerRecord& impostor,
                     const RestrictionSet& restrictions);

enum class TrialLabel { kTarget, kNontarget };
std::string_view ToString(TrialLabel label);

struct Trial {
  std::string enrol_speaker_id;
  std::string verify_recording_id;
  TrialLabel label = TrialLabel::kTarget;

  bool operator==(const Trial&) const = default;
};

// Streams every (reference speaker, C/D/E recording) pair: the speaker's own
// recordings as targets (never restricted) and other speakers' recordings as
// nontargets when the impostor passes the restrictions. Ordered by
// (enrol_speaker_id, verify_recording_id); memory is O(manifest), not
// O(trials). The manifest must outlive the generator.
class TrialGenerator {
 public:
  TrialGenerator(const Manifest& manifest, const RestrictionSet& restrictions);

  // Fills *trial and returns true, or returns false at the end.
  bool Next(Trial* trial);
  void Reset();

 private:
  const Manifest& manifest_;
  RestrictionSet restrictions_;
  std::vector<const RecordingRecord*> verify_;
  std::vector<const SpeakerRecord*> verify_owner_;
  std::size_t speaker_pos_ = 0;
  std::size_t recording_pos_ = 0;
};

struct TrialCounts {
  std::uint64_t targets = 0;
  std::uint64_t nontargets = 0;
  bool operator==(const TrialCounts&) const = default;
};

// Counts by attribute bucket without enumerating pairs.
TrialCounts CountTrials(const Manifest& manifest,
                        const RestrictionSet& restrictions);

// "enrol_speaker_id<TAB>verify_recording_id<TAB>target|nontarget".
std::string FormatTrial(const Trial& trial);
Trial ParseTrialLine(std::string_view line);
// Writes the whole stream; returns the number of trials written.
std::uint64_t WriteTrials(std::ostream& out, TrialGenerator* generator);
std::vector<Trial> ReadTrials(const std::string& path);

// Shortest decimal that round-trips to the same double.
std::string FormatScore(double score);
// Trial line, then "<TAB>score".
std::string FormatScoreLine(const Trial& trial, double score);

// Section-E responses joined into one verification unit per speaker. The
// feature files of a speaker's E recordings (in id order) are concatenated
// into out_features_dir/<speaker_id>-E.svm and the E records are replaced by
// a single record with that id. Every other feature file is symlinked into
// out_features_dir, so the returned manifest is complete against it. Throws
// DataError if a joined id collides with an existing recording.
Manifest ConcatenateSectionE(const Manifest& manifest,
                             const std::string& features_dir,
                             const std::string& out_features_dir);

using EmbeddingMap = std::unordered_map<std::string, Eigen::VectorXd>;

// Every embedding through the chain, keyed by id.
EmbeddingMap PreprocessEmbeddings(const EmbeddingSet& embeddings,
                                  const PreprocessChain& chain);

struct Enrolments {
  std::map<std::string, Eigen::VectorXd> by_speaker;
  // Speakers without any section A/B embedding.
  std::vector<std::string> excluded;
};

// Per speaker: mean of the (preprocessed) embeddings of its section A and B
// recordings, length-normalized. Speakers with none are excluded with a
// warning.
Enrolments BuildEnrolments(const Manifest& manifest,
                           const EmbeddingMap& embeddings);

struct ScoringSummary {
  std::uint64_t scored = 0;
  // Trials dropped because the enrolment or test embedding is missing.
  std::uint64_t skipped = 0;
};

// Receives the trial's position in the generated stream (skipped trials
// still consume a position), the trial and its score.
using ScoreSink = std::function<void(std::uint64_t, const Trial&, double)>;

// Yields the next trial into *trial, or returns false at the end.
using TrialSource = std::function<bool(Trial*)>;
TrialSource SourceOf(TrialGenerator* generator);

// Pulls the stream in fixed-size chunks, scores each chunk on up to `jobs`
// threads and hands results to `sink` in generation order, so the output is
// identical for every `jobs`.
ScoringSummary ScoreTrials(const TrialSource& next, const Enrolments& enrolments,
                           const EmbeddingMap& tests, const PldaScorer& scorer,
                           int jobs, const ScoreSink& sink,
                           std::size_t chunk_size = 16384);

}  // namespace verifkit

#endif  // VERIFKIT_TRIALS_H_
