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

#include "verifkit/pipeline.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"
#include "verifkit/eval.h"
#include "verifkit/extractor.h"
#include "verifkit/log.h"
#include "verifkit/plda.h"
#include "verifkit/preprocess.h"
#include "verifkit/rng.h"
#include "verifkit/synth.h"
#include "verifkit/trials.h"

#ifndef VERIFKIT_VERSION
#define VERIFKIT_VERSION "unknown"
#endif

namespace verifkit {
namespace {

namespace fs = std::filesystem;

// Reads settings and records the effective value of each one.
class SettingsReader {
 public:
  explicit SettingsReader(const KeyValueConfig& in) : in_(in) {}

  std::string String(const std::string& key, const std::string& fallback) {
    std::string v = in_.GetString(key, fallback);
    out_.Set(key, v);
    return v;
  }
  std::int64_t Int(const std::string& key, std::int64_t fallback) {
    std::int64_t v = in_.GetInt(key, fallback);
    out_.Set(key, std::to_string(v));
    return v;
  }
  std::uint64_t Uint(const std::string& key, std::uint64_t fallback) {
    std::uint64_t v = in_.GetUint(key, fallback);
    out_.Set(key, std::to_string(v));
    return v;
  }
  double Double(const std::string& key, double fallback) {
    double v = in_.GetDouble(key, fallback);
    out_.Set(key, FormatScore(v));
    return v;
  }
  bool Bool(const std::string& key, bool fallback) {
    bool v = in_.GetBool(key, fallback);
    out_.Set(key, v ? "1" : "0");
    return v;
  }
  std::vector<std::string> List(const std::string& key,
                                const std::vector<std::string>& fallback) {
    std::vector<std::string> v = in_.GetList(key, fallback);
    std::string joined;
    for (const auto& item : v) joined += (joined.empty() ? "" : ",") + item;
    out_.Set(key, joined);
    return v;
  }
  std::array<int, 5> Sections(const std::string& key, const std::string& fallback) {
    std::vector<std::string> v = List(key, {fallback});
    if (v.size() == 1 && v[0] == fallback) {
      v.clear();
      std::size_t start = 0;
      while (true) {
        std::size_t comma = fallback.find(',', start);
        v.push_back(fallback.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    if (v.size() != 5)
      throw UsageError(key + " needs five counts (sections A,B,C,D,E)");
    std::array<int, 5> counts{};
    for (int i = 0; i < 5; ++i) {
      try {
        std::size_t used = 0;
        counts[i] = std::stoi(v[i], &used);
        if (used != v[i].size() || counts[i] < 0) throw std::invalid_argument(v[i]);
      } catch (const std::exception&) {
        throw UsageError(key + ": bad count \"" + v[i] + "\"");
      }
    }
    return counts;
  }

  void RejectUnknown() const {
    std::vector<std::string> unused = in_.UnusedKeys();
    if (unused.empty()) return;
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw UsageError("unknown pipeline setting(s): " + list);
  }
  const KeyValueConfig& resolved() const { return out_; }

 private:
  const KeyValueConfig& in_;
  KeyValueConfig out_;
};

struct Settings {
  std::uint64_t seed = 0;
  std::string data;

  int feature_dim = 0;
  double rho = 0.0;
  int frames = 0;
  double domain_shift = 0.0;
  int train_speakers = 0, eval_speakers = 0, indomain_speakers = 0;
  std::array<int, 5> train_sections{}, eval_sections{}, indomain_sections{};
  std::vector<std::string> l1_pool, grade_pool;

  std::string train_manifest, train_features;
  std::string eval_manifest, eval_features;
  std::string indomain_manifest, indomain_features;

  std::string architecture;
  TrainConfig train, finetune;
  bool concat_section_e = true;
  PreprocessOptions preprocess;
  EmConfig em;
  bool adapt = false, fine_tune = false;
  AdaptConfig adapt_config;
  double fusion_a = kDefaultFusionWeightA, fusion_b = kDefaultFusionWeightB;
  std::string breakdown_system;
  int breakdown_sample = 0;
  bool write_scores = false;
};

TrainConfig ReadTrainConfig(SettingsReader* r, const std::string& prefix,
                            const TrainConfig& defaults) {
  TrainConfig c;
  c.epochs = static_cast<int>(r->Int(prefix + "epochs", defaults.epochs));
  c.learning_rate = r->Double(prefix + "learning_rate", defaults.learning_rate);
  c.momentum = r->Double(prefix + "momentum", defaults.momentum);
  c.minibatch_size = static_cast<int>(r->Int(prefix + "minibatch", defaults.minibatch_size));
  c.segment_frames =
      static_cast<int>(r->Int(prefix + "segment_frames", defaults.segment_frames));
  c.crops_per_recording =
      static_cast<int>(r->Int(prefix + "crops", defaults.crops_per_recording));
  c.Validate();
  return c;
}

Settings ReadSettings(const KeyValueConfig& config, KeyValueConfig* resolved) {
  SettingsReader r(config);
  Settings s;
  s.seed = r.Uint("seed", 0);
  s.data = r.String("data", "synth");
  if (s.data != "synth" && s.data != "files")
    throw UsageError("data must be synth or files");

  s.feature_dim = static_cast<int>(r.Int("synth.feature_dim", 24));
  s.rho = r.Double("synth.rho", 10.0);
  s.frames = static_cast<int>(r.Int("synth.frames", 150));
  s.domain_shift = r.Double("synth.domain_shift", 0.0);
  s.train_speakers = static_cast<int>(r.Int("synth.train_speakers", 20));
  s.train_sections = r.Sections("synth.train_sections", "2,2,2,2,2");
  s.eval_speakers = static_cast<int>(r.Int("synth.eval_speakers", 40));
  s.eval_sections = r.Sections("synth.eval_sections", "1,1,10,10,5");
  s.indomain_speakers = static_cast<int>(r.Int("synth.indomain_speakers", 20));
  s.indomain_sections = r.Sections("synth.indomain_sections", "2,2,2,2,2");
  s.l1_pool = r.List("synth.l1_pool", {"L1a", "L1b", "L1c"});
  s.grade_pool = r.List("synth.grade_pool", {"A1", "A2", "B1", "B2", "C1"});

  s.train_manifest = r.String("train_manifest", "");
  s.train_features = r.String("train_features", "");
  s.eval_manifest = r.String("eval_manifest", "");
  s.eval_features = r.String("eval_features", "");
  s.indomain_manifest = r.String("indomain_manifest", "");
  s.indomain_features = r.String("indomain_features", "");

  s.architecture = r.String("architecture", "desk");
  if (s.architecture != "desk" && s.architecture != "full")
    throw UsageError("architecture must be desk or full");
  TrainConfig train_defaults;
  train_defaults.epochs = 5;
  train_defaults.learning_rate = 0.01;
  train_defaults.minibatch_size = 32;
  train_defaults.segment_frames = 100;
  train_defaults.crops_per_recording = 4;
  s.train = ReadTrainConfig(&r, "train.", train_defaults);
  TrainConfig finetune_defaults = s.train;
  finetune_defaults.epochs = 3;
  s.finetune = ReadTrainConfig(&r, "finetune.", finetune_defaults);

  s.concat_section_e = r.Bool("concat_section_e", true);
  s.preprocess.lda_dim = static_cast<int>(r.Int("lda_dim", 0));
  s.preprocess.length_norm = r.Bool("length_norm", true);
  s.em.iterations = static_cast<int>(r.Int("plda.iterations", 10));
  s.em.tolerance = r.Double("plda.tolerance", 1e-6);
  if (s.em.iterations < 1) throw UsageError("plda.iterations must be >= 1");

  s.adapt = r.Bool("adapt", false);
  s.fine_tune = r.Bool("fine_tune", false);
  s.adapt_config.alpha_within = r.Double("adapt.alpha_within", 0.75);
  s.adapt_config.alpha_between = r.Double("adapt.alpha_between", 0.25);
  s.adapt_config.Validate();
  s.fusion_a = r.Double("fusion.weight_x1", kDefaultFusionWeightA);
  s.fusion_b = r.Double("fusion.weight_x2", kDefaultFusionWeightB);
  s.breakdown_system = r.String("breakdown.system", "auto");
  s.breakdown_sample = static_cast<int>(r.Int("breakdown.sample", 0));
  if (s.breakdown_sample < 0) throw UsageError("breakdown.sample must be >= 0");
  s.write_scores = r.Bool("write_scores", false);
  r.RejectUnknown();

  if (s.data == "files") {
    if (s.train_manifest.empty() || s.train_features.empty() ||
        s.eval_manifest.empty() || s.eval_features.empty())
      throw UsageError(
          "data=files needs train_manifest, train_features, eval_manifest, "
          "eval_features");
    if ((s.adapt || s.fine_tune) &&
        (s.indomain_manifest.empty() || s.indomain_features.empty()))
      throw UsageError("adapt and fine_tune need indomain_manifest, indomain_features");
  }
  if (resolved) *resolved = r.resolved();
  return s;
}

[[noreturn]] void RethrowInStage(const std::string& stage, const Error& e) {
  const std::string what = "stage " + stage + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::kUsage:
      throw UsageError(what);
    case ErrorKind::kData:
      throw DataError(what);
    case ErrorKind::kNumerical:
      throw NumericalError(what);
  }
  throw Error(e.kind(), what);
}

template <typename F>
auto RunStage(const std::string& stage, F&& body) -> decltype(body()) {
  const auto start = std::chrono::steady_clock::now();
  Log(LogLevel::kInfo, stage, "start");
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      Log(LogLevel::kInfo, stage, "done in " + std::to_string(took.count()) + " s");
    } else {
      auto result = body();
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      Log(LogLevel::kInfo, stage, "done in " + std::to_string(took.count()) + " s");
      return result;
    }
  } catch (const Error& e) {
    RethrowInStage(stage, e);
  } catch (const std::exception& e) {
    throw DataError("stage " + stage + ": " + e.what());
  }
}

struct Corpus {
  Manifest manifest;
  std::string features_dir;
};

Corpus SynthCorpus(const Settings& s, const std::string& dir, const std::string& prefix,
                   int speakers, const std::array<int, 5>& sections,
                   std::uint64_t seed, double shift) {
  SynthCorpusConfig c;
  c.num_speakers = speakers;
  c.recordings_per_section = sections;
  c.frames_per_recording = s.frames;
  c.feature_dim = s.feature_dim;
  c.rho = s.rho;
  c.domain_shift = shift;
  c.shift_seed = Rng::DeriveSeed(s.seed, 4);
  c.speaker_prefix = prefix;
  c.l1_pool = s.l1_pool;
  c.grade_pool.clear();
  for (const auto& token : s.grade_pool) {
    auto g = ParseGrade(token);
    if (!g) throw UsageError("bad grade \"" + token + "\" in synth.grade_pool");
    c.grade_pool.push_back(*g);
  }
  c.seed = seed;
  return {SampleCorpus(c, dir), dir + "/features"};
}

std::vector<std::string> SpeakerLabels(const Manifest& manifest,
                                       const EmbeddingSet& embeddings) {
  std::vector<std::string> labels;
  labels.reserve(embeddings.size());
  for (const auto& id : embeddings.ids) labels.push_back(manifest.SpeakerOf(id)->speaker_id);
  return labels;
}

Eigen::MatrixXd AsRows(const EmbeddingSet& embeddings) {
  return embeddings.values.cast<double>();
}

struct Backend {
  PreprocessChain chain;
  PldaModel plda;
};

Backend FitBackend(const Manifest& manifest, const EmbeddingSet& embeddings,
                   const Settings& s) {
  Backend b;
  const Eigen::MatrixXd rows = AsRows(embeddings);
  const std::vector<std::string> labels = SpeakerLabels(manifest, embeddings);
  b.chain = PreprocessChain::Fit(rows, labels, s.preprocess);
  b.plda = FitPlda(GroupRows(b.chain.ApplyRows(rows), labels), s.em).model;
  return b;
}

struct System {
  std::string name;
  const EmbeddingSet* eval_embeddings = nullptr;
  Backend backend;
};

// Scores of one system on one restriction row, indexed by stream position.
struct RowScores {
  std::vector<double> scores;
  std::vector<char> valid;
};

struct RowTrials {
  NamedRestriction row;
  std::vector<TrialLabel> labels;
  TrialCounts counts;
};

std::string Slug(const std::string& row_name) {
  std::string out;
  for (char c : row_name) {
    if (c == '+')
      out += '_';
    else if (c == '>')
      out += "gt";
    else
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string Percent(double fraction) {
  if (std::isnan(fraction)) return "-";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", 100.0 * fraction);
  return buffer;
}

std::string Fixed(double value) {
  if (std::isnan(value)) return "-";
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string Hex(std::uint64_t value) {
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

std::string JoinIds(const std::vector<std::string>& ids) {
  if (ids.empty()) return "none";
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ",") + id;
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  WriteFileBytes(path, text);
}

}  // namespace

KeyValueConfig ResolvePipelineConfig(const KeyValueConfig& config) {
  KeyValueConfig resolved;
  ReadSettings(config, &resolved);
  return resolved;
}

PipelineResult RunPipeline(const KeyValueConfig& config, const std::string& out_dir,
                           int jobs) {
  if (jobs < 1) throw UsageError("jobs must be >= 1");
  KeyValueConfig resolved;
  const Settings s = RunStage("config", [&] { return ReadSettings(config, &resolved); });
  PipelineResult result;
  result.config_hash = resolved.Hash();
  fs::create_directories(out_dir + "/det");

  // Data.
  Corpus train, eval, indomain;
  const bool need_indomain = s.adapt || s.fine_tune;
  RunStage("data", [&] {
    if (s.data == "synth") {
      train = SynthCorpus(s, out_dir + "/data/train", "tr", s.train_speakers,
                          s.train_sections, Rng::DeriveSeed(s.seed, 1), 0.0);
      eval = SynthCorpus(s, out_dir + "/data/eval", "ev", s.eval_speakers,
                         s.eval_sections, Rng::DeriveSeed(s.seed, 2), s.domain_shift);
      if (need_indomain)
        indomain = SynthCorpus(s, out_dir + "/data/indomain", "in", s.indomain_speakers,
                               s.indomain_sections, Rng::DeriveSeed(s.seed, 3),
                               s.domain_shift);
    } else {
      train = {ReadManifest(s.train_manifest), s.train_features};
      eval = {ReadManifest(s.eval_manifest), s.eval_features};
      if (need_indomain) indomain = {ReadManifest(s.indomain_manifest), s.indomain_features};
    }
    if (s.concat_section_e) {
      const std::string joined = out_dir + "/data/eval_joined";
      eval.manifest = ConcatenateSectionE(eval.manifest, eval.features_dir, joined);
      eval.features_dir = joined;
    }
  });

  // Source extractor.
  TrainResult source = RunStage("train", [&] {
    TrainingSet data = LoadTrainingSet(train.manifest, train.features_dir);
    if (data.examples.empty()) throw DataError("training manifest has no recordings");
    const int input_dim = static_cast<int>(data.examples.front().features.cols());
    const ArchitectureConfig arch = s.architecture == "full"
                                        ? ArchitectureConfig::Full(input_dim)
                                        : ArchitectureConfig::Desk(input_dim);
    ExtractorModel model = CreateExtractor(
        arch, static_cast<int>(data.speaker_ids.size()), Rng::DeriveSeed(s.seed, 5));
    TrainConfig cfg = s.train;
    cfg.seed = Rng::DeriveSeed(s.seed, 6);
    TrainResult trained = Train(std::move(model), data, cfg);
    WriteExtractor(out_dir + "/source.svx", trained.model);
    WriteText(out_dir + "/source_loss.tsv", FormatLossLog(trained.log));
    return trained;
  });
  if (!source.log.empty()) result.final_train_accuracy.push_back(source.log.back().accuracy);

  std::vector<std::string> skipped;
  auto extract = [&](const ExtractorModel& model, const Corpus& corpus) {
    ExtractionResult r = ExtractEmbeddings(model, corpus.manifest, corpus.features_dir, jobs);
    skipped.insert(skipped.end(), r.skipped.begin(), r.skipped.end());
    return std::move(r.embeddings);
  };

  EmbeddingSet source_eval;
  std::vector<System> systems;
  RunStage("source-backend", [&] {
    EmbeddingSet source_train = extract(source.model, train);
    source_eval = extract(source.model, eval);
    Backend b = FitBackend(train.manifest, source_train, s);
    WritePreprocess(out_dir + "/source.svt", b.chain);
    WritePlda(out_dir + "/source.svp", b.plda);
    systems.push_back({"source", &source_eval, std::move(b)});
  });

  EmbeddingSet x2_eval;
  if (s.adapt) {
    RunStage("adapt", [&] {
      EmbeddingSet in_raw = extract(source.model, indomain);
      const Eigen::MatrixXd rows = AsRows(in_raw);
      const Backend& src = systems.front().backend;
      // In-domain centring before length normalization, LDA kept.
      Backend b;
      b.chain = PreprocessChain(rows.colwise().mean().transpose(), src.chain.lda(),
                                src.chain.length_norm());
      b.plda = Adapt(src.plda, b.chain.ApplyRows(rows), s.adapt_config);
      WritePreprocess(out_dir + "/x1.svt", b.chain);
      WritePlda(out_dir + "/x1.svp", b.plda);
      systems.push_back({"X1", &source_eval, std::move(b)});
    });
  }
  if (s.fine_tune) {
    RunStage("fine-tune", [&] {
      TrainingSet data = LoadTrainingSet(indomain.manifest, indomain.features_dir);
      TrainConfig cfg = s.finetune;
      cfg.seed = Rng::DeriveSeed(s.seed, 8);
      TrainResult tuned = FineTune(source.model, data, cfg, Rng::DeriveSeed(s.seed, 7));
      WriteExtractor(out_dir + "/x2.svx", tuned.model);
      WriteText(out_dir + "/x2_loss.tsv", FormatLossLog(tuned.log));
      if (!tuned.log.empty()) result.final_train_accuracy.push_back(tuned.log.back().accuracy);
      EmbeddingSet in_emb = extract(tuned.model, indomain);
      x2_eval = extract(tuned.model, eval);
      Backend b = FitBackend(indomain.manifest, in_emb, s);
      WritePreprocess(out_dir + "/x2.svt", b.chain);
      WritePlda(out_dir + "/x2.svp", b.plda);
      systems.push_back({"X2", &x2_eval, std::move(b)});
    });
  }
  const bool fused = s.adapt && s.fine_tune;

  // Scoring.
  const std::vector<NamedRestriction> named_rows = StandardRestrictionRows();
  std::vector<RowTrials> rows;
  std::map<std::string, std::vector<RowScores>> scores;  // per system, per row
  std::vector<std::string> excluded;
  RunStage("score", [&] {
    for (const auto& nr : named_rows) {
      RowTrials rt;
      rt.row = nr;
      rt.counts = CountTrials(eval.manifest, nr.restrictions);
      const std::uint64_t n = rt.counts.targets + rt.counts.nontargets;
      rt.labels.resize(n);
      TrialGenerator gen(eval.manifest, nr.restrictions);
      Trial t;
      for (std::uint64_t i = 0; gen.Next(&t); ++i) rt.labels[i] = t.label;
      rows.push_back(std::move(rt));
    }
    for (const auto& system : systems) {
      const EmbeddingMap tests =
          PreprocessEmbeddings(*system.eval_embeddings, system.backend.chain);
      const Enrolments enrolments = BuildEnrolments(eval.manifest, tests);
      if (system.name == "source") excluded = enrolments.excluded;
      const PldaScorer scorer(system.backend.plda);
      auto& per_row = scores[system.name];
      for (const auto& rt : rows) {
        RowScores rs;
        rs.scores.assign(rt.labels.size(), 0.0);
        rs.valid.assign(rt.labels.size(), 0);
        TrialGenerator gen(eval.manifest, rt.row.restrictions);
        ScoreTrials(SourceOf(&gen), enrolments, tests, scorer, jobs,
                    [&rs](std::uint64_t i, const Trial&, double score) {
                      rs.scores[i] = score;
                      rs.valid[i] = 1;
                    });
        per_row.push_back(std::move(rs));
      }
    }
    if (fused) {
      auto& per_row = scores["fused"];
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const RowScores& a = scores["X1"][r];
        const RowScores& b = scores["X2"][r];
        RowScores rs;
        rs.scores = FuseScores(a.scores, b.scores, s.fusion_a, s.fusion_b);
        rs.valid.resize(a.valid.size());
        for (std::size_t i = 0; i < a.valid.size(); ++i) rs.valid[i] = a.valid[i] && b.valid[i];
        per_row.push_back(std::move(rs));
      }
    }
  });

  for (const auto& system : systems) result.systems.push_back(system.name);
  if (fused) result.systems.push_back("fused");
  for (const auto& rt : rows) result.rows.push_back(rt.row.name);

  // Evaluation.
  RunStage("eval", [&] {
    for (const auto& name : result.systems) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const RowScores& rs = scores[name][r];
        std::vector<double> values;
        std::vector<TrialLabel> labels;
        for (std::size_t i = 0; i < rs.scores.size(); ++i) {
          if (!rs.valid[i]) continue;
          values.push_back(rs.scores[i]);
          labels.push_back(rows[r].labels[i]);
        }
        PipelineEer& out = result.eer[name][rows[r].row.name];
        for (TrialLabel l : labels) (l == TrialLabel::kTarget ? out.targets : out.nontargets)++;
        if (out.targets == 0 || out.nontargets == 0) {
          Log(LogLevel::kWarning, "eval",
              name + " " + rows[r].row.name + ": no EER without both trial classes");
          out.eer = out.threshold = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const DetCurve det = ComputeDet(values, labels);
        const EerResult eer = ComputeEer(det);
        out.eer = eer.eer;
        out.threshold = eer.threshold;
        WriteText(out_dir + "/det/" + name + "_" + Slug(rows[r].row.name) + ".tsv",
                  FormatDet(det));
        if (s.write_scores) {
          std::string text;
          TrialGenerator gen(eval.manifest, rows[r].row.restrictions);
          Trial t;
          for (std::uint64_t i = 0; gen.Next(&t); ++i)
            if (rs.valid[i]) text += FormatScoreLine(t, rs.scores[i]) + '\n';
          WriteText(out_dir + "/scores_" + name + "_" + Slug(rows[r].row.name) + ".tsv",
                    text);
        }
      }
    }
  });

  // Breakdown on the gender row at the EER threshold.
  std::string breakdown_name = s.breakdown_system;
  if (breakdown_name == "auto")
    breakdown_name = s.fine_tune ? "X2" : (s.adapt ? "X1" : "source");
  if (!scores.count(breakdown_name))
    throw UsageError("breakdown.system " + breakdown_name + " is not part of this run");
  std::vector<FaBreakdown> breakdowns;
  std::vector<std::string> sample_warnings;
  const double breakdown_threshold = result.eer[breakdown_name][rows.front().row.name].threshold;
  if (std::isnan(breakdown_threshold))
    throw DataError("stage breakdown: no EER threshold on the " + rows.front().row.name + " row");
  RunStage("breakdown", [&] {
    for (BreakdownAttribute attribute : {BreakdownAttribute::kGrade, BreakdownAttribute::kL1}) {
      Manifest subset = eval.manifest;
      if (s.breakdown_sample > 0) {
        SampleResult sample = StratifiedSample(eval.manifest, attribute, s.breakdown_sample,
                                               Rng::DeriveSeed(s.seed, 9));
        subset = std::move(sample.manifest);
        sample_warnings.insert(sample_warnings.end(), sample.warnings.begin(),
                               sample.warnings.end());
      }
      FaBreakdownAccumulator acc(subset, attribute, breakdown_threshold);
      const RowScores& rs = scores[breakdown_name].front();
      TrialGenerator gen(eval.manifest, rows.front().row.restrictions);
      Trial t;
      for (std::uint64_t i = 0; gen.Next(&t); ++i) {
        if (!rs.valid[i]) continue;
        if (!subset.FindSpeaker(t.enrol_speaker_id) || !subset.FindRecording(t.verify_recording_id))
          continue;
        acc.Add(t, rs.scores[i]);
      }
      WriteText(out_dir + "/breakdown_" + std::string(ToString(attribute)) + ".tsv",
                FormatBreakdown(acc.result()));
      breakdowns.push_back(acc.result());
    }
  });

  // Report.
  std::string& rep = result.report;
  rep += "# verifkit pipeline report\n";
  rep += "version\t" VERIFKIT_VERSION "\n";
  rep += "seed\t" + std::to_string(s.seed) + "\n";
  rep += "config_hash\t" + Hex(result.config_hash) + "\n";
  rep += "systems\t" + JoinIds(result.systems) + "\n";
  rep += "\n[config]\n" + resolved.Serialize();
  rep += "\n[training]\nsystem\tepoch\tloss\taccuracy\n";
  for (const auto& e : source.log)
    rep += "source\t" + std::to_string(e.epoch) + "\t" + Fixed(e.loss) + "\t" +
           Fixed(e.accuracy) + "\n";
  if (s.fine_tune) {
    const std::string log = ReadFileBytes(out_dir + "/x2_loss.tsv");
    std::size_t start = 0;
    while (start < log.size()) {
      std::size_t nl = log.find('\n', start);
      std::string line = log.substr(start, nl - start);
      std::size_t t1 = line.find('\t'), t2 = line.find('\t', t1 + 1);
      rep += "X2\t" + line.substr(0, t1) + "\t" +
             Fixed(std::stod(line.substr(t1 + 1, t2 - t1 - 1))) + "\t" +
             Fixed(std::stod(line.substr(t2 + 1))) + "\n";
      start = nl + 1;
    }
  }
  rep += "\n[trials]\nrestriction\ttargets\tnontargets\n";
  for (const auto& rt : rows)
    rep += rt.row.name + "\t" + std::to_string(rt.counts.targets) + "\t" +
           std::to_string(rt.counts.nontargets) + "\n";
  rep += "\n[eer_percent]\nrestriction";
  for (const auto& name : result.systems) rep += "\t" + name;
  rep += "\n";
  for (const auto& rt : rows) {
    rep += rt.row.name;
    for (const auto& name : result.systems) rep += "\t" + Percent(result.eer[name][rt.row.name].eer);
    rep += "\n";
  }
  rep += "\n[eer_threshold]\nrestriction";
  for (const auto& name : result.systems) rep += "\t" + name;
  rep += "\n";
  for (const auto& rt : rows) {
    rep += rt.row.name;
    for (const auto& name : result.systems)
      rep += "\t" + Fixed(result.eer[name][rt.row.name].threshold);
    rep += "\n";
  }
  rep += "\n[det]\n";
  for (const auto& name : result.systems)
    for (const auto& rt : rows)
      if (!std::isnan(result.eer[name][rt.row.name].eer))
        rep += name + "\t" + rt.row.name + "\tdet/" + name + "_" + Slug(rt.row.name) + ".tsv\n";
  for (const auto& b : breakdowns) {
    rep += "\n[breakdown " + std::string(ToString(b.attribute)) + "]\n";
    rep += "system\t" + breakdown_name + "\n";
    rep += "restriction\t" + rows.front().row.name + "\n";
    rep += "threshold\t" + Fixed(breakdown_threshold) + "\n";
    rep += "false_alarms\t" + std::to_string(b.total) + "\n";
    rep += FormatBreakdown(b);
  }
  rep += "\n[excluded]\n";
  std::sort(skipped.begin(), skipped.end());
  skipped.erase(std::unique(skipped.begin(), skipped.end()), skipped.end());
  rep += "recordings_skipped\t" + JoinIds(skipped) + "\n";
  rep += "speakers_without_enrolment\t" + JoinIds(excluded) + "\n";
  for (const auto& w : sample_warnings) rep += "sample_warning\t" + w + "\n";
  WriteText(out_dir + "/report.txt", rep);
  return result;
}

}  // namespace verifkit
