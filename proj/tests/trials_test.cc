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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oracles.h"
#include "test_util.h"
#include "verifkit/error.h"
#include "verifkit/matrix_io.h"
#include "verifkit/plda.h"
#include "verifkit/rng.h"
#include "verifkit/trials.h"

namespace verifkit {
namespace {

using testing::LogCapture;
using testing::RandomManifest;
using testing::RandomMatrix;
using testing::TempDir;
using testing::TrialTuple;

std::vector<TrialTuple> Stream(const Manifest& m, const RestrictionSet& r) {
  TrialGenerator gen(m, r);
  std::vector<TrialTuple> out;
  Trial t;
  while (gen.Next(&t))
    out.emplace_back(t.enrol_speaker_id, t.verify_recording_id, t.label == TrialLabel::kTarget);
  return out;
}

// Every flag combination except grade together with grade-higher.
std::vector<RestrictionSet> AllRestrictionSets() {
  std::vector<RestrictionSet> out;
  for (int mask = 0; mask < 16; ++mask) {
    RestrictionSet r{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0, (mask & 8) != 0};
    if (r.grade_equal && r.grade_higher) continue;
    out.push_back(r);
  }
  return out;
}

testing::BruteForceFlags Flags(const RestrictionSet& r) {
  return {r.gender, r.l1, r.grade_equal, r.grade_higher};
}

SpeakerRecord Speaker(const std::string& id, Gender g, const std::string& l1, Grade grade) {
  return {id, g, l1, grade};
}

RecordingRecord Rec(const std::string& id, const std::string& spk, Section s) {
  return {id, spk, s, "/x/" + id + ".f32@16000"};
}

TEST(RestrictionTest, ParseAndFormat) {
  EXPECT_EQ(RestrictionSet::Parse(""), RestrictionSet{});
  EXPECT_EQ(RestrictionSet::Parse("none"), RestrictionSet{});
  RestrictionSet r = RestrictionSet::Parse("gender, l1,>grade");
  EXPECT_TRUE(r.gender && r.l1 && r.grade_higher && !r.grade_equal);
  EXPECT_EQ(RestrictionSet::Parse(r.ToString()), r);
  EXPECT_EQ(RestrictionSet::Parse("grade-higher"), RestrictionSet::Parse(">grade"));
  EXPECT_THROW(RestrictionSet::Parse("gender,accent"), UsageError);
  EXPECT_THROW(RestrictionSet::Parse("grade,grade-higher"), UsageError);
}

TEST(RestrictionTest, StandardRows) {
  auto rows = StandardRestrictionRows();
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& row : rows) EXPECT_TRUE(row.restrictions.gender) << row.name;
  EXPECT_EQ(rows[0].name, "gender");
  EXPECT_TRUE(rows[5].restrictions.l1 && rows[5].restrictions.grade_higher);
}

TEST(TrialGeneratorTest, TwoSpeakerExample) {
  Manifest m = Manifest::Create(
      {Speaker("s1", Gender::kFemale, "Thai", Grade::kB1),
       Speaker("s2", Gender::kFemale, "Thai", Grade::kB1)},
      {Rec("s1-A1", "s1", Section::kA), Rec("s1-C1", "s1", Section::kC),
       Rec("s2-A1", "s2", Section::kA), Rec("s2-C1", "s2", Section::kC)});
  std::vector<TrialTuple> expected = {{"s1", "s1-C1", true},
                                      {"s1", "s2-C1", false},
                                      {"s2", "s1-C1", false},
                                      {"s2", "s2-C1", true}};
  EXPECT_EQ(Stream(m, RestrictionSet::Parse("gender")), expected);
  EXPECT_EQ(CountTrials(m, RestrictionSet::Parse("gender")), (TrialCounts{2, 2}));
}

TEST(TrialGeneratorTest, GradeHigherFromCOnlyAdmitsC) {
  const Grade grades[] = {Grade::kA1, Grade::kA2, Grade::kB1, Grade::kB2, Grade::kC1, Grade::kC2};
  std::vector<SpeakerRecord> speakers;
  std::vector<RecordingRecord> recs;
  for (int g = 0; g < 6; ++g) {
    std::string id = "g" + std::to_string(g);
    speakers.push_back(Speaker(id, Gender::kMale, "Urdu", grades[g]));
    recs.push_back(Rec(id + "-D1", id, Section::kD));
  }
  Manifest m = Manifest::Create(speakers, recs);
  RestrictionSet higher = RestrictionSet::Parse(">grade");
  auto impostors = [&](const std::string& ref) {
    std::set<std::string> out;
    for (const auto& [e, v, target] : Stream(m, higher))
      if (e == ref && !target) out.insert(v);
    return out;
  };
  EXPECT_EQ(impostors("g4"), (std::set<std::string>{"g5-D1"}));
  EXPECT_EQ(impostors("g5"), (std::set<std::string>{"g4-D1"}));
  EXPECT_EQ(impostors("g3"), (std::set<std::string>{"g4-D1", "g5-D1"}));
  EXPECT_EQ(impostors("g1"), (std::set<std::string>{"g2-D1", "g3-D1", "g4-D1", "g5-D1"}));
}

TEST(TrialGeneratorTest, MatchesBruteForceOnRandomManifests) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    Manifest m = RandomManifest(&rng, 30);
    for (const auto& r : AllRestrictionSets()) {
      auto stream = Stream(m, r);
      ASSERT_EQ(stream, testing::BruteForceTrials(m, Flags(r)))
          << "manifest " << trial << " restrictions " << r.ToString();
      TrialCounts c = CountTrials(m, r);
      EXPECT_EQ(c.targets + c.nontargets, stream.size());
      EXPECT_EQ(c.targets, static_cast<std::uint64_t>(std::count_if(
                               stream.begin(), stream.end(),
                               [](const TrialTuple& t) { return std::get<2>(t); })));
    }
  }
}

TEST(TrialGeneratorTest, ResetReplaysStream) {
  Rng rng(5);
  Manifest m = RandomManifest(&rng, 12);
  TrialGenerator gen(m, RestrictionSet::Parse("gender,l1"));
  std::ostringstream a, b;
  WriteTrials(a, &gen);
  gen.Reset();
  WriteTrials(b, &gen);
  EXPECT_EQ(a.str(), b.str());
  TrialGenerator fresh(m, RestrictionSet::Parse("gender,l1"));
  std::ostringstream c;
  WriteTrials(c, &fresh);
  EXPECT_EQ(a.str(), c.str());
}

TEST(TrialCountTest, EmptyManifest) {
  EXPECT_EQ(CountTrials(Manifest{}, RestrictionSet::Parse("gender")), (TrialCounts{0, 0}));
}

TEST(TrialCountTest, AddingFlagsNeverAddsNontargets) {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    Manifest m = RandomManifest(&rng, 30);
    const auto sets = AllRestrictionSets();
    for (const auto& a : sets) {
      for (const auto& b : sets) {
        const bool superset = (b.gender || !a.gender) && (b.l1 || !a.l1) &&
                              (b.grade_equal || !a.grade_equal) &&
                              (b.grade_higher || !a.grade_higher);
        if (!superset) continue;
        TrialCounts ca = CountTrials(m, a), cb = CountTrials(m, b);
        EXPECT_LE(cb.nontargets, ca.nontargets);
        EXPECT_EQ(cb.targets, ca.targets);
      }
    }
  }
}

TEST(TrialCountTest, CompositionIsIntersection) {
  Rng rng(78);
  for (int trial = 0; trial < 20; ++trial) {
    Manifest m = RandomManifest(&rng, 20);
    const auto sets = AllRestrictionSets();
    for (const auto& a : sets) {
      for (const auto& b : sets) {
        RestrictionSet both{a.gender || b.gender, a.l1 || b.l1, a.grade_equal || b.grade_equal,
                            a.grade_higher || b.grade_higher};
        if (both.grade_equal && both.grade_higher) continue;
        auto sa = Stream(m, a), sb = Stream(m, b);
        std::vector<TrialTuple> inter;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::back_inserter(inter));
        EXPECT_EQ(Stream(m, both), inter);
      }
    }
  }
}

TEST(TrialFileTest, RoundTripAndErrors) {
  TempDir dir;
  Rng rng(9);
  Manifest m = RandomManifest(&rng, 10);
  TrialGenerator gen(m, RestrictionSet::Parse("gender"));
  {
    std::ofstream out(dir / "trials.tsv");
    WriteTrials(out, &gen);
  }
  std::vector<Trial> read = ReadTrials(dir / "trials.tsv");
  gen.Reset();
  Trial t;
  std::size_t i = 0;
  while (gen.Next(&t)) {
    ASSERT_LT(i, read.size());
    EXPECT_EQ(read[i++], t);
  }
  EXPECT_EQ(i, read.size());
  EXPECT_EQ(FormatTrial({"s1", "s1-C1", TrialLabel::kTarget}), "s1\ts1-C1\ttarget");
  EXPECT_THROW(ParseTrialLine("s1\ts1-C1"), DataError);
  EXPECT_THROW(ParseTrialLine("s1\ts1-C1\tmaybe"), DataError);
  std::ofstream(dir / "bad.tsv") << "s1\ts1-C1\ttarget\nbroken\n";
  try {
    ReadTrials(dir / "bad.tsv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(TrialFileTest, ScoresUseShortestRoundTrip) {
  Rng rng(10);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.Normal() * std::pow(10.0, rng.Uniform(-8, 8));
    const std::string text = FormatScore(v);
    EXPECT_EQ(std::strtod(text.c_str(), nullptr), v);
  }
  EXPECT_EQ(FormatScore(0.1), "0.1");
  EXPECT_EQ(FormatScore(-2.5), "-2.5");
  EXPECT_EQ(FormatScoreLine({"a", "b", TrialLabel::kNontarget}, 1.0), "a\tb\tnontarget\t1");
}

TEST(EnrolmentBuildTest, SectionCases) {
  Manifest m = Manifest::Create(
      {Speaker("a", Gender::kMale, "Thai", Grade::kA1),
       Speaker("b", Gender::kMale, "Thai", Grade::kA1),
       Speaker("c", Gender::kMale, "Thai", Grade::kA1)},
      {Rec("a-A1", "a", Section::kA), Rec("a-C1", "a", Section::kC),
       Rec("b-A1", "b", Section::kA), Rec("b-B1", "b", Section::kB),
       Rec("c-C1", "c", Section::kC)});
  EmbeddingMap e;
  e["a-A1"] = Eigen::Vector2d(3.0, 4.0);
  e["a-C1"] = Eigen::Vector2d(100.0, 0.0);
  e["b-A1"] = Eigen::Vector2d(1.0, 0.0);
  e["b-B1"] = Eigen::Vector2d(0.0, 3.0);
  e["c-C1"] = Eigen::Vector2d(1.0, 1.0);
  LogCapture log;
  Enrolments en = BuildEnrolments(m, e);
  ASSERT_EQ(en.by_speaker.size(), 2u);
  // Norm sqrt(2) after normalization.
  const double r2 = std::sqrt(2.0);
  EXPECT_LE((en.by_speaker.at("a") - Eigen::Vector2d(0.6 * r2, 0.8 * r2)).norm(), 1e-15);
  // Mean (0.5, 1.5), norm sqrt(2.5).
  const Eigen::Vector2d mean(0.5, 1.5);
  EXPECT_LE((en.by_speaker.at("b") - mean * r2 / std::sqrt(2.5)).norm(), 1e-15);
  EXPECT_EQ(en.excluded, std::vector<std::string>{"c"});
  EXPECT_TRUE(log.Contains("WARNING\tenrol"));
}

struct ScoringFixture {
  Manifest manifest;
  EmbeddingMap embeddings;
  PldaModel model;
};

ScoringFixture MakeScoringFixture(std::uint64_t seed) {
  Rng rng(seed);
  ScoringFixture f;
  f.manifest = RandomManifest(&rng, 25);
  for (const auto& r : f.manifest.recordings())
    f.embeddings[r.recording_id] = RandomMatrix(3, 1, &rng);
  f.model.mean = Eigen::VectorXd::Zero(3);
  f.model.between = Eigen::MatrixXd::Identity(3, 3);
  f.model.within = 0.5 * Eigen::MatrixXd::Identity(3, 3);
  return f;
}

std::vector<std::string> ScoreLines(const ScoringFixture& f, int jobs, std::size_t chunk,
                                    ScoringSummary* summary = nullptr) {
  LogCapture quiet;
  Enrolments en = BuildEnrolments(f.manifest, f.embeddings);
  PldaScorer scorer(f.model);
  TrialGenerator gen(f.manifest, RestrictionSet::Parse("gender"));
  std::vector<std::string> lines;
  ScoringSummary s = ScoreTrials(
      SourceOf(&gen), en, f.embeddings, scorer, jobs,
      [&](std::uint64_t index, const Trial& t, double score) {
        lines.push_back(std::to_string(index) + "\t" + FormatScoreLine(t, score));
      },
      chunk);
  if (summary) *summary = s;
  return lines;
}

TEST(ScoreTrialsTest, OutputIndependentOfJobsAndChunking) {
  ScoringFixture f = MakeScoringFixture(31);
  auto reference = ScoreLines(f, 1, 16384);
  ASSERT_FALSE(reference.empty());
  EXPECT_EQ(ScoreLines(f, 4, 16384), reference);
  EXPECT_EQ(ScoreLines(f, 8, 7), reference);
  EXPECT_EQ(ScoreLines(f, 3, 1), reference);
}

TEST(ScoreTrialsTest, ScoresMatchDirectEvaluation) {
  ScoringFixture f = MakeScoringFixture(32);
  LogCapture quiet;
  Enrolments en = BuildEnrolments(f.manifest, f.embeddings);
  PldaScorer scorer(f.model);
  TrialGenerator gen(f.manifest, RestrictionSet{});
  ScoreTrials(SourceOf(&gen), en, f.embeddings, scorer, 2,
              [&](std::uint64_t, const Trial& t, double score) {
                EXPECT_NEAR(score,
                            PldaScore(f.model, en.by_speaker.at(t.enrol_speaker_id),
                                      f.embeddings.at(t.verify_recording_id)),
                            1e-12);
              });
}

TEST(ScoreTrialsTest, MissingEmbeddingsAreSkippedButKeepTheirIndex) {
  ScoringFixture f = MakeScoringFixture(33);
  ScoringSummary before;
  const auto full = ScoreLines(f, 1, 5, &before);
  // Drop one verification embedding.
  std::string dropped;
  for (const auto& r : f.manifest.recordings())
    if (IsVerificationSection(r.section)) {
      dropped = r.recording_id;
      break;
    }
  ASSERT_FALSE(dropped.empty());
  f.embeddings.erase(dropped);
  ScoringSummary summary;
  const auto partial = ScoreLines(f, 2, 5, &summary);
  EXPECT_GT(summary.skipped, before.skipped);
  EXPECT_EQ(summary.scored + summary.skipped, before.scored + before.skipped);
  std::vector<std::string> expected;
  for (const auto& line : full)
    if (line.find("\t" + dropped + "\t") == std::string::npos) expected.push_back(line);
  EXPECT_EQ(partial, expected);
}

TEST(ConcatenateSectionETest, JoinsResponsesInIdOrder) {
  TempDir dir;
  const std::string feats = dir / "feats", out = dir / "joined";
  std::filesystem::create_directories(feats);
  Manifest m = Manifest::Create(
      {Speaker("s1", Gender::kMale, "Thai", Grade::kA1)},
      {Rec("s1-A1", "s1", Section::kA), Rec("s1-E1", "s1", Section::kE),
       Rec("s1-E2", "s1", Section::kE), Rec("s1-E3", "s1", Section::kE)});
  std::vector<FeatureMatrix> parts;
  for (const auto& r : m.recordings()) {
    FeatureMatrix f = FeatureMatrix::Constant(2 + static_cast<int>(parts.size()), 3,
                                              static_cast<float>(parts.size()));
    WriteMatrix(FeaturePath(feats, r.recording_id), f);
    parts.push_back(f);
  }
  Manifest joined = ConcatenateSectionE(m, feats, out);
  ASSERT_EQ(joined.recordings().size(), 2u);
  const RecordingRecord* e = joined.FindRecording("s1-E");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->section, Section::kE);
  FeatureMatrix got = ReadMatrix(FeaturePath(out, "s1-E"));
  FeatureMatrix expected(parts[1].rows() + parts[2].rows() + parts[3].rows(), 3);
  expected << parts[1], parts[2], parts[3];
  EXPECT_EQ(got, expected);
  EXPECT_TRUE(std::filesystem::is_symlink(FeaturePath(out, "s1-A1")));
  EXPECT_EQ(ReadMatrix(FeaturePath(out, "s1-A1")), parts[0]);
}

TEST(ConcatenateSectionETest, Errors) {
  TempDir dir;
  Manifest m = Manifest::Create({Speaker("s1", Gender::kMale, "Thai", Grade::kA1)},
                                {Rec("s1-E", "s1", Section::kC), Rec("s1-E1", "s1", Section::kE)});
  EXPECT_THROW(ConcatenateSectionE(m, dir / "missing", dir / "out"), DataError);
  std::filesystem::create_directories(dir / "feats");
  WriteMatrix(FeaturePath(dir / "feats", "s1-E1"), FeatureMatrix::Zero(2, 2));
  EXPECT_THROW(ConcatenateSectionE(m, dir / "feats", dir / "out"), DataError);
}

}  // namespace
}  // namespace verifkit
