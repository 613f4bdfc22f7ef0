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

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "verifkit/error.h"
#include "verifkit/eval.h"
#include "verifkit/log.h"
#include "verifkit/rng.h"

namespace verifkit {

SampleResult StratifiedSample(const Manifest& manifest,
                              BreakdownAttribute group, int n_per_group,
                              std::uint64_t seed) {
  if (n_per_group < 1) throw UsageError("sample: n_per_group must be >= 1");
  // Speakers are already sorted by id, so each pool starts in a fixed order.
  std::map<std::string, std::array<std::vector<const SpeakerRecord*>, 2>> pools;
  for (const auto& s : manifest.speakers())
    pools[AttributeValue(s, group)][s.gender == Gender::kFemale ? 1 : 0]
        .push_back(&s);

  SampleResult result;
  std::set<std::string> chosen;
  const std::size_t n = static_cast<std::size_t>(n_per_group);
  std::uint64_t stream = 0;
  for (auto& [value, by_gender] : pools) {
    Rng rng(Rng::DeriveSeed(seed, stream++));
    for (auto& pool : by_gender) rng.Shuffle(std::span(pool));
    const std::size_t total = by_gender[0].size() + by_gender[1].size();
    std::size_t take_f = std::min(n / 2, by_gender[1].size());
    std::size_t take_m = std::min(n - take_f, by_gender[0].size());
    take_f = std::min(n - take_m, by_gender[1].size());
    if (total < n) {
      std::string warning = "group " + std::string(ToString(group)) + "=" + value +
                            " has " + std::to_string(total) + " speakers, fewer than " +
                            std::to_string(n) + "; taking all";
      Log(LogLevel::kWarning, "sample", warning);
      result.warnings.push_back(std::move(warning));
    }
    for (std::size_t i = 0; i < take_m; ++i) chosen.insert(by_gender[0][i]->speaker_id);
    for (std::size_t i = 0; i < take_f; ++i) chosen.insert(by_gender[1][i]->speaker_id);
  }

  std::vector<SpeakerRecord> speakers;
  std::vector<RecordingRecord> recordings;
  for (const auto& s : manifest.speakers())
    if (chosen.count(s.speaker_id)) speakers.push_back(s);
  for (const auto& r : manifest.recordings())
    if (chosen.count(r.speaker_id)) recordings.push_back(r);
  result.manifest = Manifest::Create(std::move(speakers), std::move(recordings));
  return result;
}

}  // namespace verifkit
