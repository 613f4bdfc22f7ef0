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

#include <cmath>

#include "verifkit/error.h"
#include "verifkit/eval.h"

namespace verifkit {

std::vector<double> FuseScores(std::span<const double> a,
                               std::span<const double> b, double weight_a,
                               double weight_b) {
  if (a.size() != b.size())
    throw DataError("fuse: score lists differ in length");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = weight_a * a[i] + weight_b * b[i];
  return out;
}

ScoreSet Fuse(const ScoreSet& a, const ScoreSet& b, double weight_a,
              double weight_b) {
  if (!std::isfinite(weight_a) || !std::isfinite(weight_b))
    throw UsageError("fuse: weights must be finite");
  a.Validate();
  b.Validate();
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!(a.trials[i] == b.trials[i]))
      throw DataError("fuse: trial lists differ at line " + std::to_string(i + 1) +
                      ": \"" + FormatTrial(a.trials[i]) + "\" vs \"" +
                      FormatTrial(b.trials[i]) + "\"");
  if (a.size() != b.size())
    throw DataError("fuse: trial lists differ at line " + std::to_string(n + 1) +
                    ": one list ends after " + std::to_string(n) + " trials");
  ScoreSet out;
  out.trials = a.trials;
  out.scores = FuseScores(a.scores, b.scores, weight_a, weight_b);
  return out;
}

}  // namespace verifkit
