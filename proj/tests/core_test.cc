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

#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "test_util.h"
#include "verifkit/binary_io.h"
#include "verifkit/config_file.h"
#include "verifkit/error.h"
#include "verifkit/log.h"
#include "verifkit/manifest.h"
#include "verifkit/matrix_io.h"
#include "verifkit/parallel.h"
#include "verifkit/rng.h"

namespace verifkit {
namespace {

using testing::TempDir;

TEST(ErrorTest, KindsMapToExitCodes) {
  EXPECT_EQ(static_cast<int>(UsageError("x").kind()), 1);
  EXPECT_EQ(static_cast<int>(DataError("x").kind()), 2);
  EXPECT_EQ(static_cast<int>(NumericalError("x").kind()), 3);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    double x = a.Normal();
    EXPECT_EQ(x, b.Normal());
    differs |= x != c.Normal();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, UniformIntStaysInRange) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    std::uint64_t v = rng.UniformInt(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(RngTest, NormalMoments) {
  Rng rng(11);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    double x = rng.Normal();
    sum += x;
    sum2 += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(RngTest, ShuffleIsPermutation) {
  Rng rng(5);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.Shuffle(std::span<int>(v));
  std::set<int> seen(v.begin(), v.end());
  EXPECT_EQ(seen.size(), 50u);
}

TEST(RngTest, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(Rng::DeriveSeed(42, s));
  EXPECT_EQ(seeds.size(), 100u);
  EXPECT_EQ(Rng::DeriveSeed(42, 3), Rng::DeriveSeed(42, 3));
}

TEST(BinaryIoTest, RoundTripLittleEndian) {
  BinaryWriter w;
  w.PutMagic("TEST");
  w.PutU32(0x01020304u);
  w.PutI32(-5);
  w.PutF32(1.5f);
  w.PutF64(-2.25);
  w.PutString("hello");
  const std::string bytes = w.Release();
  EXPECT_EQ(bytes[4], '\x04');
  EXPECT_EQ(bytes[7], '\x01');
  BinaryReader r(bytes, "test");
  r.ExpectMagic("TEST");
  EXPECT_EQ(r.GetU32(), 0x01020304u);
  EXPECT_EQ(r.GetI32(), -5);
  EXPECT_EQ(r.GetF32(), 1.5f);
  EXPECT_EQ(r.GetF64(), -2.25);
  EXPECT_EQ(r.GetString(), "hello");
  EXPECT_TRUE(r.AtEnd());
}

TEST(BinaryIoTest, TruncationAndMagicErrors) {
  BinaryWriter w;
  w.PutMagic("ABCD");
  w.PutU32(9);
  std::string bytes = w.Release();
  BinaryReader bad_magic(bytes, "x");
  EXPECT_THROW(bad_magic.ExpectMagic("ABCE"), DataError);
  BinaryReader truncated(std::string_view(bytes).substr(0, 6), "x");
  truncated.ExpectMagic("ABCD");
  EXPECT_THROW(truncated.GetU32(), DataError);
}

TEST(BinaryIoTest, MissingFileIsDataError) {
  EXPECT_THROW(ReadFileBytes("/nonexistent/verifkit/file"), DataError);
}

TEST(ManifestTest, ParsesAndSorts) {
  const std::string text =
      "# comment\n"
      "SPK\ts2\tF\tThai\tB1\n"
      "SPK\ts1\tm\tUrdu\tC2\n"
      "REC\tr2\ts1\tC\t/a/r2.f32@16000\n"
      "REC\tr1\ts2\tA\t/a/r1.f32@16000\n";
  Manifest m = ParseManifest(text);
  ASSERT_EQ(m.speakers().size(), 2u);
  EXPECT_EQ(m.speakers()[0].speaker_id, "s1");
  EXPECT_EQ(m.speakers()[0].merged_grade(), MergedGrade::kC);
  EXPECT_EQ(m.recordings()[0].recording_id, "r1");
  EXPECT_EQ(m.SpeakerOf("r2")->speaker_id, "s1");
  EXPECT_EQ(m.FindRecording("zz"), nullptr);
}

TEST(ManifestTest, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      ParseManifest(text);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("SPK\ts1\tF\tThai\tB1\nSPK\ts2\tF\tThai\tD9\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(message("SPK\ts1\tF\tThai\tB1\nREC\tr\ts1\tF\tp\n").find("section"),
            std::string::npos);
  EXPECT_NE(message("SPK\ts1\tF\tThai\n").find("line 1"), std::string::npos);
  EXPECT_THROW(ParseManifest("SPK\ts1\tF\tThai\tB1\nSPK\ts1\tM\tThai\tB1\n"), DataError);
  EXPECT_THROW(ParseManifest("REC\tr\tghost\tA\tp\n"), DataError);
  EXPECT_THROW(ParseManifest("SPK\ts1\tF\tThai\tB1\nREC\tr\ts1\tA\tp\nREC\tr\ts1\tB\tq\n"),
               DataError);
}

TEST(ManifestTest, RoundTripProperty) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    Manifest m = testing::RandomManifest(&rng, 20);
    Manifest again = ParseManifest(SerializeManifest(m));
    ASSERT_EQ(m, again);
    EXPECT_EQ(SerializeManifest(again), SerializeManifest(m));
  }
}

TEST(ManifestTest, GenderTokens) {
  EXPECT_EQ(ParseGender("f"), Gender::kFemale);
  EXPECT_EQ(ParseGender("M"), Gender::kMale);
  EXPECT_FALSE(ParseGender("male").has_value());
  EXPECT_FALSE(ParseGender("").has_value());
}

TEST(ManifestTest, GradeMerging) {
  EXPECT_EQ(Merge(Grade::kC1), MergedGrade::kC);
  EXPECT_EQ(Merge(Grade::kC2), MergedGrade::kC);
  EXPECT_EQ(Merge(Grade::kB2), MergedGrade::kB2);
  EXPECT_TRUE(IsEnrolmentSection(Section::kB));
  EXPECT_TRUE(IsVerificationSection(Section::kE));
}

TEST(MatrixIoTest, BitExactRoundTrip) {
  TempDir dir;
  Rng rng(1);
  FeatureMatrix m(17, 5);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = static_cast<float>(rng.Normal() * 1e3);
  m(0, 0) = std::numeric_limits<float>::denorm_min();
  m(1, 1) = -0.0f;
  WriteMatrix(dir / "m.svm", m);
  FeatureMatrix back = ReadMatrix(dir / "m.svm");
  ASSERT_EQ(back.rows(), 17);
  ASSERT_EQ(back.cols(), 5);
  EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(float) * m.size()), 0);
}

TEST(MatrixIoTest, RejectsCorruptPayloads) {
  FeatureMatrix m = FeatureMatrix::Constant(2, 2, 1.0f);
  std::string bytes = EncodeMatrix(m);
  EXPECT_THROW(DecodeMatrix(bytes.substr(0, bytes.size() - 1)), DataError);
  EXPECT_THROW(DecodeMatrix(bytes + "x"), DataError);
  m(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(DecodeMatrix(EncodeMatrix(m)), DataError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DecodeMatrix(bad), DataError);
}

TEST(MatrixIoTest, EmbeddingsRoundTrip) {
  EmbeddingSet set;
  set.ids = {"a", "b", "c"};
  set.values = FeatureMatrix::Random(3, 4);
  EmbeddingSet back = DecodeEmbeddings(EncodeEmbeddings(set));
  EXPECT_EQ(back.ids, set.ids);
  EXPECT_EQ(back.values, set.values);
  EXPECT_EQ(back.Find("b").value(), 1u);
  EXPECT_FALSE(back.Find("z").has_value());
}

TEST(ConfigFileTest, ParseOverrideAndHash) {
  KeyValueConfig c = KeyValueConfig::Parse("# c\n a = 1 \nb=x,y,,z\nflag=yes\n");
  EXPECT_EQ(c.GetInt("a", 0), 1);
  EXPECT_EQ(c.GetList("b", {}), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_TRUE(c.GetBool("flag", false));
  EXPECT_EQ(c.GetDouble("missing", 2.5), 2.5);
  const std::uint64_t h = c.Hash();
  KeyValueConfig d = KeyValueConfig::Parse("flag=yes\nb=x,y,,z\na=1\n");
  EXPECT_EQ(d.Hash(), h);
  c.SetAssignment("a=2");
  EXPECT_NE(c.Hash(), h);
  EXPECT_EQ(c.GetInt("a", 0), 2);
}

TEST(ConfigFileTest, ReportsUnusedAndBadValues) {
  KeyValueConfig c = KeyValueConfig::Parse("used=1\ntypo=2\nword=abc\n");
  c.GetInt("used", 0);
  EXPECT_EQ(c.UnusedKeys(), (std::vector<std::string>{"typo", "word"}));
  EXPECT_THROW(c.GetInt("word", 0), UsageError);
  EXPECT_THROW(c.GetBool("word", false), UsageError);
  EXPECT_THROW(KeyValueConfig::Parse("novalue\n"), UsageError);
}

TEST(ConfigFileTest, FnvKnownValues) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(ParallelTest, VisitsEveryIndexOnce) {
  for (int jobs : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(1000);
    ParallelFor(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(ParallelTest, PropagatesExceptions) {
  EXPECT_THROW(ParallelFor(100, 4,
                           [](std::size_t i) {
                             if (i == 57) throw DataError("boom");
                           }),
               DataError);
}

TEST(LogTest, FormatsLevelStageMessage) {
  testing::LogCapture capture;
  Log(LogLevel::kWarning, "plda", "ridge added");
  LogMessage(LogLevel::kError, "cli") << "code " << 3;
  ASSERT_EQ(capture.lines().size(), 2u);
  EXPECT_EQ(capture.lines()[0], "WARNING\tplda\tridge added");
  EXPECT_EQ(capture.lines()[1], "ERROR\tcli\tcode 3");
}

}  // namespace
}  // namespace verifkit
