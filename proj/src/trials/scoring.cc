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

#include <optional>
#include <vector>

#include "verifkit/error.h"
#include "verifkit/log.h"
#include "verifkit/parallel.h"
#include "verifkit/trials.h"

namespace verifkit {

TrialSource SourceOf(TrialGenerator* generator) {
  return [generator](Trial* trial) { return generator->Next(trial); };
}

ScoringSummary ScoreTrials(const TrialSource& next, const Enrolments& enrolments,
                           const EmbeddingMap& tests, const PldaScorer& scorer,
                           int jobs, const ScoreSink& sink,
                           std::size_t chunk_size) {
  if (chunk_size == 0) throw UsageError("score: chunk size must be positive");
  auto check_dim = [&scorer](const Eigen::VectorXd& v, const std::string& id) {
    if (v.size() != scorer.dim())
      throw DataError("embedding " + id + " has dim " + std::to_string(v.size()) +
                      ", PLDA expects " + std::to_string(scorer.dim()));
  };

  std::unordered_map<std::string, PldaScorer::Prepared> enrol_prepared;
  for (const auto& [id, v] : enrolments.by_speaker) {
    check_dim(v, id);
    enrol_prepared.emplace(id, scorer.Prepare(v));
  }
  std::unordered_map<std::string, PldaScorer::Prepared> test_prepared;

  ScoringSummary summary;
  std::vector<Trial> chunk;
  std::vector<const PldaScorer::Prepared*> lhs, rhs;
  std::vector<double> scores;
  chunk.reserve(chunk_size);
  std::uint64_t missing_enrol = 0, missing_test = 0;
  std::uint64_t position = 0;
  while (true) {
    chunk.clear();
    Trial trial;
    while (chunk.size() < chunk_size && next(&trial))
      chunk.push_back(std::move(trial));
    if (chunk.empty()) break;

    lhs.assign(chunk.size(), nullptr);
    rhs.assign(chunk.size(), nullptr);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      auto e = enrol_prepared.find(chunk[i].enrol_speaker_id);
      if (e == enrol_prepared.end()) {
        ++missing_enrol;
        continue;
      }
      const std::string& test_id = chunk[i].verify_recording_id;
      auto t = test_prepared.find(test_id);
      if (t == test_prepared.end()) {
        auto raw = tests.find(test_id);
        if (raw == tests.end()) {
          ++missing_test;
          continue;
        }
        check_dim(raw->second, test_id);
        t = test_prepared.emplace(test_id, scorer.Prepare(raw->second)).first;
      }
      lhs[i] = &e->second;
      rhs[i] = &t->second;
    }
    scores.assign(chunk.size(), 0.0);
    ParallelFor(chunk.size(), jobs, [&](std::size_t i) {
      if (lhs[i]) scores[i] = scorer.Score(*lhs[i], *rhs[i]);
    });
    for (std::size_t i = 0; i < chunk.size(); ++i, ++position) {
      if (!lhs[i]) continue;
      sink(position, chunk[i], scores[i]);
      ++summary.scored;
    }
  }
  summary.skipped = missing_enrol + missing_test;
  if (missing_enrol > 0)
    Log(LogLevel::kWarning, "score",
        std::to_string(missing_enrol) + " trial(s) skipped: no enrolment");
  if (missing_test > 0)
    Log(LogLevel::kWarning, "score",
        std::to_string(missing_test) + " trial(s) skipped: no test embedding");
  return summary;
}

}  // namespace verifkit
