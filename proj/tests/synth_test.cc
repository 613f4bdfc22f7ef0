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

#include <cmath>
#include <map>

#include "test_util.h"
#include "verifkit/error.h"
#include "verifkit/manifest.h"
#include "verifkit/matrix_io.h"
#include "verifkit/synth.h"

namespace verifkit {
namespace {

using testing::TempDir;

SynthPldaConfig PldaConfig(double between, double within, int speakers, int per,
                           std::uint64_t seed) {
  SynthPldaConfig c;
  c.dim = 4;
  c.between = between * Eigen::MatrixXd::Identity(4, 4);
  c.within = within * Eigen::MatrixXd::Identity(4, 4);
  c.num_speakers = speakers;
  c.embeddings_per_speaker = per;
  c.seed = seed;
  return c;
}

Eigen::MatrixXd SampleCovariance(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(rows.rows());
}

TEST(SamplePldaTest, NoSpeakerFactorWithZeroBetween) {
  PldaSample s = SamplePlda(PldaConfig(0.0, 1.0, 2000, 5, 1));
  EXPECT_EQ(s.speaker_factors.cwiseAbs().maxCoeff(), 0.0);
  // Per-speaker means scatter only as within / n.
  Eigen::MatrixXd means(2000, 4);
  for (int sp = 0; sp < 2000; ++sp) means.row(sp) = s.rows.middleRows(sp * 5, 5).colwise().mean();
  Eigen::MatrixXd between = SampleCovariance(means) - Eigen::MatrixXd::Identity(4, 4) / 5.0;
  EXPECT_LE(between.norm(), 0.05);
}

TEST(SamplePldaTest, TotalCovarianceNearSum) {
  PldaSample s = SamplePlda(PldaConfig(2.0, 1.0, 500, 10, 2));
  ASSERT_EQ(s.rows.rows(), 5000);
  const Eigen::MatrixXd expected = 3.0 * Eigen::MatrixXd::Identity(4, 4);
  EXPECT_LE((SampleCovariance(s.rows) - expected).norm() / expected.norm(), 0.10);
}

TEST(SamplePldaTest, DeterministicAndLabelled) {
  SynthPldaConfig c = PldaConfig(2.0, 1.0, 20, 3, 3);
  c.mean = Eigen::VectorXd::Constant(4, 5.0);
  PldaSample a = SamplePlda(c), b = SamplePlda(c);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.ids, b.ids);
  std::map<std::string, int> per;
  for (const auto& l : a.labels) ++per[l];
  EXPECT_EQ(per.size(), 20u);
  for (const auto& [label, n] : per) EXPECT_EQ(n, 3);
  // Rows of a speaker share that speaker's factor.
  c.within = 1e-12 * Eigen::MatrixXd::Identity(4, 4);
  PldaSample tight = SamplePlda(c);
  EXPECT_LE((tight.rows.row(0) - tight.rows.row(1)).norm(), 1e-4);
  EXPECT_LE((tight.rows.row(0).transpose() - c.mean - tight.speaker_factors.row(0).transpose()).norm(),
            1e-4);
}

TEST(SamplePldaTest, InvalidCovariances) {
  SynthPldaConfig c = PldaConfig(2.0, 1.0, 5, 2, 1);
  c.between(0, 0) = -1.0;
  EXPECT_THROW(SamplePlda(c), NumericalError);
  c = PldaConfig(2.0, 0.0, 5, 2, 1);
  EXPECT_THROW(SamplePlda(c), NumericalError);
  c = PldaConfig(2.0, 1.0, 0, 2, 1);
  EXPECT_THROW(SamplePlda(c), UsageError);
}

TEST(SamplePldaTest, WritesEmbeddingsAndManifest) {
  TempDir dir;
  PldaSample s = SamplePlda(PldaConfig(2.0, 1.0, 6, 2, 4));
  WritePldaSample(s, dir.path());
  EmbeddingSet e = ReadEmbeddings(dir / "embeddings.sve");
  EXPECT_EQ(e.ids, s.ids);
  Manifest m = ReadManifest(dir / "manifest.tsv");
  EXPECT_EQ(m.speakers().size(), 6u);
  EXPECT_EQ(m.recordings().size(), 12u);
}

TEST(CovarianceSpecTest, Forms) {
  Rng rng(5);
  EXPECT_EQ(ParseCovarianceSpec("diag:2", 3, &rng), 2.0 * Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd d = ParseCovarianceSpec("diag:1,2,3", 3, &rng);
  EXPECT_EQ(d.diagonal(), Eigen::Vector3d(1, 2, 3));
  Eigen::MatrixXd r = ParseCovarianceSpec("random:10:2", 5, &rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  EXPECT_LE((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_LE(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff(), 10.0 + 1e-9);
  EXPECT_THROW(ParseCovarianceSpec("diag:1,2", 3, &rng), UsageError);
  EXPECT_THROW(ParseCovarianceSpec("full:1", 3, &rng), UsageError);
}

TEST(SymmetricSqrtTest, SquaresBack) {
  Rng rng(6);
  Eigen::MatrixXd c = RandomCovariance(4, 50.0, 1.0, &rng);
  Eigen::MatrixXd s = SymmetricSqrt(c);
  EXPECT_LE((s * s - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RoundRobinTest, NineSpeakersThreePerL1) {
  SynthCorpusConfig c;
  c.num_speakers = 9;
  c.l1_pool = {"X", "Y", "Z"};
  std::map<std::string, int> per;
  for (const auto& s : RoundRobinSpeakers(c)) ++per[s.l1];
  EXPECT_EQ(per, (std::map<std::string, int>{{"X", 3}, {"Y", 3}, {"Z", 3}}));
}

TEST(RoundRobinTest, AssignmentIsPositional) {
  SynthCorpusConfig c;
  c.num_speakers = 30;
  auto speakers = RoundRobinSpeakers(c);
  for (int i = 0; i < 30; ++i) {
    EXPECT_EQ(speakers[i].gender, c.genders[i % 2]);
    EXPECT_EQ(speakers[i].l1, c.l1_pool[i % 3]);
    EXPECT_EQ(speakers[i].grade, c.grade_pool[i % 5]);
  }
}

TEST(SampleCorpusTest, ValidManifestAndSeparatedCentres) {
  TempDir dir;
  SynthCorpusConfig c;
  c.num_speakers = 5;
  c.recordings_per_section = {1, 2, 1, 1, 3};
  c.frames_per_recording = 400;
  c.feature_dim = 6;
  c.rho = 10.0;
  c.seed = 7;
  Manifest m = SampleCorpus(c, dir.path());
  EXPECT_EQ(m.recordings().size(), 5u * 8u);
  EXPECT_EQ(ParseManifest(SerializeManifest(m)), m);
  EXPECT_EQ(ReadManifest(dir / "manifest.tsv"), m);
  for (const auto& r : m.recordings()) {
    FeatureMatrix f = ReadMatrix(FeaturePath(dir / "features", r.recording_id));
    ASSERT_EQ(f.rows(), 400);
    ASSERT_EQ(f.cols(), 6);
    // Frame mean sits at norm rho up to noise of order 1/sqrt(T).
    EXPECT_NEAR(f.cast<double>().colwise().mean().norm(), 10.0, 0.5);
  }
}

TEST(SampleCorpusTest, DeterministicAndShiftAddsVector) {
  TempDir a, b, shifted;
  SynthCorpusConfig c;
  c.num_speakers = 3;
  c.frames_per_recording = 20;
  c.feature_dim = 5;
  c.seed = 8;
  Manifest ma = SampleCorpus(c, a.path());
  SampleCorpus(c, b.path());
  SynthCorpusConfig s = c;
  s.domain_shift = 7.0;
  s.shift_seed = 99;
  SampleCorpus(s, shifted.path());
  const Eigen::VectorXd shift = DomainShiftVector(s);
  EXPECT_NEAR(shift.norm(), 7.0, 1e-12);
  for (const auto& r : ma.recordings()) {
    FeatureMatrix fa = ReadMatrix(FeaturePath(a / "features", r.recording_id));
    FeatureMatrix fb = ReadMatrix(FeaturePath(b / "features", r.recording_id));
    FeatureMatrix fs = ReadMatrix(FeaturePath(shifted / "features", r.recording_id));
    EXPECT_EQ(EncodeMatrix(fa), EncodeMatrix(fb));
    Eigen::MatrixXd diff = fs.cast<double>() - fa.cast<double>();
    for (Eigen::Index t = 0; t < diff.rows(); ++t)
      EXPECT_LE((diff.row(t).transpose() - shift).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(SampleCorpusTest, ConfigParsing) {
  KeyValueConfig kv = KeyValueConfig::Parse(
      "num_speakers=4\nsections=1,0,2,0,1\nrho=0\nl1_pool=P,Q\ngrade_pool=C2\ngenders=F\n");
  SynthCorpusConfig c = SynthCorpusConfig::FromConfig(kv);
  EXPECT_EQ(c.num_speakers, 4);
  EXPECT_EQ(c.recordings_per_section, (std::array<int, 5>{1, 0, 2, 0, 1}));
  EXPECT_EQ(c.rho, 0.0);
  auto speakers = RoundRobinSpeakers(c);
  EXPECT_EQ(speakers[1].l1, "Q");
  EXPECT_EQ(speakers[3].grade, Grade::kC2);
  EXPECT_EQ(speakers[2].gender, Gender::kFemale);
  EXPECT_THROW(SynthCorpusConfig::FromConfig(KeyValueConfig::Parse("rho=-1\n")), UsageError);
  EXPECT_THROW(SynthCorpusConfig::FromConfig(KeyValueConfig::Parse("sections=1,2\n")), UsageError);
}

}  // namespace
}  // namespace verifkit
