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

// Drives the built verifkit binary through a shell.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "test_util.h"
#include "verifkit/binary_io.h"
#include "verifkit/eval.h"
#include "verifkit/manifest.h"
#include "verifkit/trials.h"

namespace verifkit {
namespace {

using testing::TempDir;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  RunResult Run(const std::string& args) {
    const char* binary = VERIFKIT_CLI;
    const std::string err_file = dir_ / "stderr.txt";
    const std::string command = "cd '" + dir_.path() + "' && '" + std::string(binary) +
                                "' " + args + " 2>'" + err_file + "'";
    RunResult r;
    FILE* pipe = popen(command.c_str(), "r");
    std::array<char, 4096> buffer;
    std::size_t n;
    while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = ReadFileBytes(err_file);
    return r;
  }

  void MakeCorpus() {
    RunResult r = Run(
        "synth corpus --out-dir c --seed 1 --set num_speakers=6 --set frames=60 "
        "--set feature_dim=8 --set sections=1,1,2,2,2");
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }

  TempDir dir_;
};

TEST_F(CliTest, HelpAndVersion) {
  RunResult r = Run("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("pipeline"), std::string::npos);
  EXPECT_EQ(Run("--version").exit_code, 0);
  EXPECT_EQ(Run("plda score --help").exit_code, 0);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Run("").exit_code, 1);
  EXPECT_EQ(Run("bogus").exit_code, 1);
  EXPECT_EQ(Run("trials count").exit_code, 1);
  EXPECT_EQ(Run("--jobs 0 trials count --manifest x").exit_code, 1);
  MakeCorpus();
  RunResult r = Run("trials count --manifest c/manifest.tsv --restrict grade,grade-higher");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("ERROR\t"), std::string::npos);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  RunResult r = Run("trials count --manifest missing.tsv");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("missing.tsv"), std::string::npos);
}

TEST_F(CliTest, NumericalErrorsExitThree) {
  RunResult r = Run("synth plda --out-dir p --set within=diag:0");
  EXPECT_EQ(r.exit_code, 3) << r.err;
}

TEST_F(CliTest, TrialCountMatchesLibrary) {
  MakeCorpus();
  RunResult r = Run("trials count --manifest c/manifest.tsv --restrict gender,l1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  TrialCounts c = CountTrials(ReadManifest(dir_ / "c/manifest.tsv"),
                              RestrictionSet::Parse("gender,l1"));
  EXPECT_EQ(r.out, "targets\t" + std::to_string(c.targets) + "\nnontargets\t" +
                       std::to_string(c.nontargets) + "\n");
  RunResult g = Run("trials generate --manifest c/manifest.tsv --restrict gender,l1 --out t.tsv");
  ASSERT_EQ(g.exit_code, 0) << g.err;
  EXPECT_EQ(ReadTrials(dir_ / "t.tsv").size(), c.targets + c.nontargets);
}

TEST_F(CliTest, EndToEndChain) {
  MakeCorpus();
  auto ok = [&](const std::string& args) {
    RunResult r = Run(args);
    EXPECT_EQ(r.exit_code, 0) << args << "\n" << r.err;
    return r;
  };
  ok("extractor train --model m.svx --manifest c/manifest.tsv --features c/features "
     "--seed 2 --loss-log loss.tsv --set epochs=2 --set segment_frames=40");
  ok("extractor extract --model m.svx --manifest c/manifest.tsv --features c/features --out e.sve");
  ok("plda fit --embeddings e.sve --manifest c/manifest.tsv --out-plda p.plda --out-preprocess p.pre");
  ok("plda score --plda p.plda --preprocess p.pre --embeddings e.sve --manifest c/manifest.tsv "
     "--restrict gender --out s1.tsv");
  ok("--jobs 3 plda score --plda p.plda --preprocess p.pre --embeddings e.sve "
     "--manifest c/manifest.tsv --restrict gender --out s2.tsv");
  EXPECT_EQ(ReadFileBytes(dir_ / "s1.tsv"), ReadFileBytes(dir_ / "s2.tsv"));
  RunResult eer = ok("eval eer --scores s1.tsv");
  EXPECT_EQ(eer.out.rfind("eer_percent\t", 0), 0u);
  ok("eval det --scores s1.tsv --out det.tsv");
  ok("eval fuse --a s1.tsv --b s2.tsv --out f.tsv");
  ScoreSet a = ReadScores(dir_ / "s1.tsv"), f = ReadScores(dir_ / "f.tsv");
  ASSERT_EQ(a.size(), f.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(f.scores[i], a.scores[i], 1e-12 * (1 + std::abs(a.scores[i])));
  ok("eval breakdown --scores s1.tsv --manifest c/manifest.tsv --attribute grade --threshold 0");
}

TEST_F(CliTest, PipelineWritesReport) {
  RunResult r = Run(
      "pipeline --out-dir run --seed 4 --set synth.train_speakers=6 --set synth.eval_speakers=12 "
      "--set synth.frames=60 --set synth.feature_dim=8 --set synth.eval_sections=1,1,2,2,2 "
      "--set train.epochs=1 --set train.segment_frames=40");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string report = ReadFileBytes(dir_ / "run/report.txt");
  EXPECT_NE(report.find("seed\t4\n"), std::string::npos);
  EXPECT_NE(report.find("[eer_percent]"), std::string::npos);
}

}  // namespace
}  // namespace verifkit
