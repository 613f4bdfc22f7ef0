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

// verifkit command-line front end: one subcommand per module.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "verifkit/augment.h"
#include "verifkit/binary_io.h"
#include "verifkit/config_file.h"
#include "verifkit/error.h"
#include "verifkit/eval.h"
#include "verifkit/extractor.h"
#include "verifkit/fbank.h"
#include "verifkit/log.h"
#include "verifkit/manifest.h"
#include "verifkit/pipeline.h"
#include "verifkit/plda.h"
#include "verifkit/preprocess.h"
#include "verifkit/synth.h"
#include "verifkit/trials.h"

#ifndef VERIFKIT_VERSION
#define VERIFKIT_VERSION "unknown"
#endif

namespace verifkit {
namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void AddConfigOptions(CLI::App* app, ConfigArgs* args) {
  app->add_option("--config", args->path, "key=value config file");
  app->add_option("--set", args->overrides, "override, key=value (repeatable)");
}

KeyValueConfig LoadConfig(const ConfigArgs& args) {
  KeyValueConfig config = args.path.empty() ? KeyValueConfig() : KeyValueConfig::Read(args.path);
  for (const auto& o : args.overrides) config.SetAssignment(o);
  return config;
}

void RejectUnknown(const KeyValueConfig& config, const std::string& command) {
  std::vector<std::string> unused = config.UnusedKeys();
  if (unused.empty()) return;
  std::string list;
  for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
  throw UsageError(command + ": unknown config key(s): " + list);
}

// --seed flag, then the config's seed, then VERIFKIT_SEED, then 0.
void ApplySeed(const std::optional<std::uint64_t>& flag, KeyValueConfig* config) {
  if (flag) {
    config->Set("seed", std::to_string(*flag));
    return;
  }
  if (config->Has("seed")) return;
  if (const char* env = std::getenv("VERIFKIT_SEED")) {
    KeyValueConfig probe;
    probe.Set("seed", env);
    config->Set("seed", std::to_string(probe.GetUint("seed", 0)));
  }
}

std::uint64_t SeedOf(const std::optional<std::uint64_t>& flag) {
  KeyValueConfig config;
  ApplySeed(flag, &config);
  return config.GetUint("seed", 0);
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    WriteFileBytes(path, text);
  }
}

FbankConfig ReadFbankConfig(const KeyValueConfig& c) {
  FbankConfig f;
  f.num_filters = static_cast<int>(c.GetInt("num_filters", f.num_filters));
  f.frame_length_ms = c.GetDouble("frame_length_ms", f.frame_length_ms);
  f.frame_shift_ms = c.GetDouble("frame_shift_ms", f.frame_shift_ms);
  f.fft_size = static_cast<int>(c.GetInt("fft_size", f.fft_size));
  f.low_freq = c.GetDouble("low_freq", f.low_freq);
  f.high_freq = c.GetDouble("high_freq", f.high_freq);
  f.energy_floor = c.GetDouble("energy_floor", f.energy_floor);
  f.mean_normalize = c.GetBool("mean_normalize", f.mean_normalize);
  return f;
}

AugmentPolicy ReadAugmentPolicy(const KeyValueConfig& c) {
  AugmentPolicy p;
  p.noise_snr_min = c.GetDouble("noise_snr_min", p.noise_snr_min);
  p.noise_snr_max = c.GetDouble("noise_snr_max", p.noise_snr_max);
  p.music_snr_min = c.GetDouble("music_snr_min", p.music_snr_min);
  p.music_snr_max = c.GetDouble("music_snr_max", p.music_snr_max);
  p.babble_snr_min = c.GetDouble("babble_snr_min", p.babble_snr_min);
  p.babble_snr_max = c.GetDouble("babble_snr_max", p.babble_snr_max);
  p.rt60_min = c.GetDouble("rt60_min", p.rt60_min);
  p.rt60_max = c.GetDouble("rt60_max", p.rt60_max);
  return p;
}

TrainConfig ReadTrainConfig(const KeyValueConfig& c) {
  TrainConfig t;
  t.epochs = static_cast<int>(c.GetInt("epochs", t.epochs));
  t.learning_rate = c.GetDouble("learning_rate", t.learning_rate);
  t.momentum = c.GetDouble("momentum", t.momentum);
  t.minibatch_size = static_cast<int>(c.GetInt("minibatch", t.minibatch_size));
  t.segment_frames = static_cast<int>(c.GetInt("segment_frames", t.segment_frames));
  t.crops_per_recording = static_cast<int>(c.GetInt("crops", t.crops_per_recording));
  t.seed = c.GetUint("seed", 0);
  t.Validate();
  return t;
}

Eigen::MatrixXd Rows(const EmbeddingSet& set) { return set.values.cast<double>(); }

std::vector<std::string> LabelsFor(const EmbeddingSet& set, const Manifest& manifest) {
  std::vector<std::string> labels;
  for (const auto& id : set.ids) {
    const SpeakerRecord* s = manifest.SpeakerOf(id);
    if (!s) throw DataError("embedding " + id + " is not a manifest recording");
    labels.push_back(s->speaker_id);
  }
  return labels;
}

std::string EerText(const EerResult& eer) {
  return "eer_percent\t" + FormatScore(100.0 * eer.eer) + "\nthreshold\t" +
         FormatScore(eer.threshold) + "\n";
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"verifkit: x-vector / PLDA speaker verification toolkit"};
  app.set_version_flag("--version", VERIFKIT_VERSION);
  app.require_subcommand(1);
  int jobs = 1;
  std::string log_level = "info";
  app.add_option("--jobs", jobs, "worker threads for per-recording and per-chunk work")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "debug|info|warning|error");

  // features
  auto* features = app.add_subcommand("features", "filterbank extraction and augmentation");
  features->require_subcommand(1);
  struct {
    std::string manifest, out_dir, out_manifest;
    ConfigArgs config;
    std::optional<std::uint64_t> seed;
  } fa;
  auto* f_extract = features->add_subcommand("extract", "log-mel filterbank features per recording");
  f_extract->add_option("--manifest", fa.manifest)->required();
  f_extract->add_option("--out-dir", fa.out_dir)->required();
  AddConfigOptions(f_extract, &fa.config);
  auto* f_augment = features->add_subcommand("augment", "one augmented copy per recording");
  f_augment->add_option("--manifest", fa.manifest)->required();
  f_augment->add_option("--out-dir", fa.out_dir)->required();
  f_augment->add_option("--out-manifest", fa.out_manifest)->required();
  f_augment->add_option("--seed", fa.seed);
  AddConfigOptions(f_augment, &fa.config);

  // extractor
  auto* extractor = app.add_subcommand("extractor", "x-vector extractor training and extraction");
  extractor->require_subcommand(1);
  struct {
    std::string model, out, manifest, features, loss_log;
    ConfigArgs config;
    std::optional<std::uint64_t> seed;
  } xa;
  auto* x_train = extractor->add_subcommand("train", "train a new extractor");
  x_train->add_option("--model", xa.model, "output model file")->required();
  x_train->add_option("--manifest", xa.manifest)->required();
  x_train->add_option("--features", xa.features, "feature directory")->required();
  x_train->add_option("--loss-log", xa.loss_log, "epoch<TAB>loss<TAB>accuracy file (default stdout)");
  x_train->add_option("--seed", xa.seed);
  AddConfigOptions(x_train, &xa.config);
  auto* x_tune = extractor->add_subcommand("fine-tune", "new head, then train all layers");
  x_tune->add_option("--model", xa.model, "source model")->required();
  x_tune->add_option("--out", xa.out, "output model")->required();
  x_tune->add_option("--manifest", xa.manifest)->required();
  x_tune->add_option("--features", xa.features)->required();
  x_tune->add_option("--loss-log", xa.loss_log);
  x_tune->add_option("--seed", xa.seed);
  AddConfigOptions(x_tune, &xa.config);
  auto* x_extract = extractor->add_subcommand("extract", "one embedding per recording");
  x_extract->add_option("--model", xa.model)->required();
  x_extract->add_option("--manifest", xa.manifest)->required();
  x_extract->add_option("--features", xa.features)->required();
  x_extract->add_option("--out", xa.out, "embedding file")->required();

  // plda
  auto* plda = app.add_subcommand("plda", "PLDA back-end");
  plda->require_subcommand(1);
  struct {
    std::string embeddings, manifest, plda, preprocess, out_plda, out_preprocess, trials,
        restrict, out;
    double alpha_within = 0.75, alpha_between = 0.25;
    bool keep_mean = false;
    ConfigArgs config;
  } pa;
  auto* p_fit = plda->add_subcommand("fit", "fit preprocessing and PLDA on labelled embeddings");
  p_fit->add_option("--embeddings", pa.embeddings)->required();
  p_fit->add_option("--manifest", pa.manifest, "maps embedding ids to speakers")->required();
  p_fit->add_option("--out-plda", pa.out_plda)->required();
  p_fit->add_option("--out-preprocess", pa.out_preprocess)->required();
  AddConfigOptions(p_fit, &pa.config);
  auto* p_adapt = plda->add_subcommand("adapt", "unsupervised adaptation to in-domain embeddings");
  p_adapt->add_option("--plda", pa.plda)->required();
  p_adapt->add_option("--preprocess", pa.preprocess)->required();
  p_adapt->add_option("--embeddings", pa.embeddings, "unlabelled in-domain embeddings")->required();
  p_adapt->add_option("--out-plda", pa.out_plda)->required();
  p_adapt->add_option("--out-preprocess", pa.out_preprocess)->required();
  p_adapt->add_option("--alpha-within", pa.alpha_within);
  p_adapt->add_option("--alpha-between", pa.alpha_between);
  p_adapt->add_flag("--keep-mean", pa.keep_mean, "keep the source centring in the preprocess chain");
  auto* p_score = plda->add_subcommand("score", "score trials against A/B enrolments");
  p_score->add_option("--plda", pa.plda)->required();
  p_score->add_option("--preprocess", pa.preprocess)->required();
  p_score->add_option("--embeddings", pa.embeddings)->required();
  p_score->add_option("--manifest", pa.manifest)->required();
  auto* trials_opt = p_score->add_option("--trials", pa.trials, "trial file");
  p_score->add_option("--restrict", pa.restrict, "generate trials instead")->excludes(trials_opt);
  p_score->add_option("--out", pa.out, "score file (default stdout)");

  // trials
  auto* trials = app.add_subcommand("trials", "trial list generation");
  trials->require_subcommand(1);
  struct {
    std::string manifest, restrict, out, features, out_features, out_manifest;
  } ta;
  auto* t_generate = trials->add_subcommand("generate", "write the trial stream");
  t_generate->add_option("--manifest", ta.manifest)->required();
  t_generate->add_option("--restrict", ta.restrict, "comma list of gender,l1,grade,grade-higher");
  t_generate->add_option("--out", ta.out, "trial file (default stdout)");
  auto* t_count = trials->add_subcommand("count", "count targets and nontargets");
  t_count->add_option("--manifest", ta.manifest)->required();
  t_count->add_option("--restrict", ta.restrict);
  auto* t_join = trials->add_subcommand("join-e", "concatenate section E responses per speaker");
  t_join->add_option("--manifest", ta.manifest)->required();
  t_join->add_option("--features", ta.features)->required();
  t_join->add_option("--out-features", ta.out_features)->required();
  t_join->add_option("--out-manifest", ta.out_manifest)->required();

  // eval
  auto* eval = app.add_subcommand("eval", "EER, DET, breakdown, fusion, sampling");
  eval->require_subcommand(1);
  struct {
    std::string scores, a, b, manifest, attribute = "grade", out;
    std::optional<double> threshold;
    double weight_a = kDefaultFusionWeightA, weight_b = kDefaultFusionWeightB;
    int n = 200;
    std::optional<std::uint64_t> seed;
  } ea;
  auto* e_eer = eval->add_subcommand("eer", "equal error rate");
  e_eer->add_option("--scores", ea.scores)->required();
  auto* e_det = eval->add_subcommand("det", "threshold<TAB>fa<TAB>miss curve");
  e_det->add_option("--scores", ea.scores)->required();
  e_det->add_option("--out", ea.out);
  auto* e_breakdown = eval->add_subcommand("breakdown", "false alarms by attribute");
  e_breakdown->add_option("--scores", ea.scores)->required();
  e_breakdown->add_option("--manifest", ea.manifest)->required();
  e_breakdown->add_option("--attribute", ea.attribute, "grade|l1");
  e_breakdown->add_option("--threshold", ea.threshold, "default: the EER threshold");
  e_breakdown->add_option("--out", ea.out);
  auto* e_fuse = eval->add_subcommand("fuse", "linear score fusion");
  e_fuse->add_option("--a", ea.a)->required();
  e_fuse->add_option("--b", ea.b)->required();
  e_fuse->add_option("--weight-a", ea.weight_a);
  e_fuse->add_option("--weight-b", ea.weight_b);
  e_fuse->add_option("--out", ea.out);
  auto* e_sample = eval->add_subcommand("sample", "gender-balanced speaker subset per group");
  e_sample->add_option("--manifest", ea.manifest)->required();
  e_sample->add_option("--attribute", ea.attribute, "grade|l1");
  e_sample->add_option("--n", ea.n, "speakers per group")->check(CLI::PositiveNumber);
  e_sample->add_option("--seed", ea.seed);
  e_sample->add_option("--out", ea.out);

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic data");
  synth->require_subcommand(1);
  struct {
    std::string out_dir;
    ConfigArgs config;
    std::optional<std::uint64_t> seed;
  } sa;
  auto* s_plda = synth->add_subcommand("plda", "embeddings from the two-covariance model");
  s_plda->add_option("--out-dir", sa.out_dir)->required();
  s_plda->add_option("--seed", sa.seed);
  AddConfigOptions(s_plda, &sa.config);
  auto* s_corpus = synth->add_subcommand("corpus", "frame-level corpus with manifest");
  s_corpus->add_option("--out-dir", sa.out_dir)->required();
  s_corpus->add_option("--seed", sa.seed);
  AddConfigOptions(s_corpus, &sa.config);

  // pipeline
  struct {
    std::string out_dir;
    ConfigArgs config;
    std::optional<std::uint64_t> seed;
    bool adapt = false, fine_tune = false;
  } ra;
  auto* pipeline = app.add_subcommand("pipeline", "end-to-end run with report");
  pipeline->add_option("--out-dir", ra.out_dir)->required();
  pipeline->add_option("--seed", ra.seed);
  pipeline->add_flag("--adapt", ra.adapt, "add the PLDA-adapted system (X1)");
  pipeline->add_flag("--fine-tune", ra.fine_tune, "add the fine-tuned extractor system (X2)");
  AddConfigOptions(pipeline, &ra.config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (log_level == "debug")
    SetMinLogLevel(LogLevel::kDebug);
  else if (log_level == "info")
    SetMinLogLevel(LogLevel::kInfo);
  else if (log_level == "warning")
    SetMinLogLevel(LogLevel::kWarning);
  else if (log_level == "error")
    SetMinLogLevel(LogLevel::kError);
  else
    throw UsageError("unknown log level " + log_level);

  if (f_extract->parsed()) {
    KeyValueConfig config = LoadConfig(fa.config);
    FbankConfig fbank = ReadFbankConfig(config);
    RejectUnknown(config, "features extract");
    FeatureBatchResult r = ExtractCorpusFeatures(ReadManifest(fa.manifest), fbank, fa.out_dir, jobs);
    Log(LogLevel::kInfo, "features",
        std::to_string(r.written) + " written, " + std::to_string(r.failures.size()) + " failed");
    return r.written == 0 && !r.failures.empty() ? 2 : 0;
  }
  if (f_augment->parsed()) {
    KeyValueConfig config = LoadConfig(fa.config);
    ApplySeed(fa.seed, &config);
    const std::uint64_t seed = config.GetUint("seed", 0);
    AugmentPolicy policy = ReadAugmentPolicy(config);
    RejectUnknown(config, "features augment");
    DoubledCorpus r = DoubleCorpus(ReadManifest(fa.manifest), policy, seed, fa.out_dir);
    WriteManifest(fa.out_manifest, r.manifest);
    return 0;
  }
  if (x_train->parsed() || x_tune->parsed()) {
    KeyValueConfig config = LoadConfig(xa.config);
    ApplySeed(xa.seed, &config);
    const std::string arch_name = config.GetString("architecture", "desk");
    TrainConfig train = ReadTrainConfig(config);
    RejectUnknown(config, "extractor");
    TrainingSet data = LoadTrainingSet(ReadManifest(xa.manifest), xa.features);
    if (data.examples.empty()) throw DataError("training manifest has no recordings");
    TrainResult r;
    if (x_train->parsed()) {
      if (arch_name != "desk" && arch_name != "full")
        throw UsageError("architecture must be desk or full");
      const int dim = static_cast<int>(data.examples.front().features.cols());
      ArchitectureConfig arch =
          arch_name == "full" ? ArchitectureConfig::Full(dim) : ArchitectureConfig::Desk(dim);
      ExtractorModel model = CreateExtractor(arch, static_cast<int>(data.speaker_ids.size()),
                                             Rng::DeriveSeed(train.seed, 1));
      r = Train(std::move(model), data, train);
      WriteExtractor(xa.model, r.model);
    } else {
      r = FineTune(ReadExtractor(xa.model), data, train, Rng::DeriveSeed(train.seed, 2));
      WriteExtractor(xa.out, r.model);
    }
    WriteOutput(xa.loss_log, FormatLossLog(r.log));
    return 0;
  }
  if (x_extract->parsed()) {
    ExtractionResult r =
        ExtractEmbeddings(ReadExtractor(xa.model), ReadManifest(xa.manifest), xa.features, jobs);
    WriteEmbeddings(xa.out, r.embeddings);
    return 0;
  }
  if (p_fit->parsed()) {
    KeyValueConfig config = LoadConfig(pa.config);
    PreprocessOptions options;
    options.lda_dim = static_cast<int>(config.GetInt("lda_dim", options.lda_dim));
    options.length_norm = config.GetBool("length_norm", options.length_norm);
    EmConfig em;
    em.iterations = static_cast<int>(config.GetInt("iterations", em.iterations));
    em.tolerance = config.GetDouble("tolerance", em.tolerance);
    RejectUnknown(config, "plda fit");
    EmbeddingSet set = ReadEmbeddings(pa.embeddings);
    const std::vector<std::string> labels = LabelsFor(set, ReadManifest(pa.manifest));
    const Eigen::MatrixXd rows = Rows(set);
    PreprocessChain chain = PreprocessChain::Fit(rows, labels, options);
    PldaFitResult fit = FitPlda(GroupRows(chain.ApplyRows(rows), labels), em);
    WritePreprocess(pa.out_preprocess, chain);
    WritePlda(pa.out_plda, fit.model);
    return 0;
  }
  if (p_adapt->parsed()) {
    PreprocessChain chain = ReadPreprocess(pa.preprocess);
    const Eigen::MatrixXd rows = Rows(ReadEmbeddings(pa.embeddings));
    if (!pa.keep_mean)
      chain = PreprocessChain(rows.colwise().mean().transpose(), chain.lda(), chain.length_norm());
    AdaptConfig config{pa.alpha_within, pa.alpha_between};
    PldaModel adapted = Adapt(ReadPlda(pa.plda), chain.ApplyRows(rows), config);
    WritePreprocess(pa.out_preprocess, chain);
    WritePlda(pa.out_plda, adapted);
    return 0;
  }
  if (p_score->parsed()) {
    const Manifest manifest = ReadManifest(pa.manifest);
    const PreprocessChain chain = ReadPreprocess(pa.preprocess);
    const EmbeddingMap tests = PreprocessEmbeddings(ReadEmbeddings(pa.embeddings), chain);
    const Enrolments enrolments = BuildEnrolments(manifest, tests);
    const PldaScorer scorer(ReadPlda(pa.plda));
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!pa.out.empty() && pa.out != "-") {
      file.open(pa.out);
      if (!file) throw DataError("cannot write " + pa.out);
      out = &file;
    }
    auto sink = [out](std::uint64_t, const Trial& t, double s) {
      *out << FormatScoreLine(t, s) << '\n';
    };
    ScoringSummary summary;
    if (!pa.trials.empty()) {
      std::ifstream in(pa.trials);
      if (!in) throw DataError("cannot open " + pa.trials);
      std::string line;
      std::size_t line_number = 0;
      TrialSource source = [&](Trial* t) {
        while (std::getline(in, line)) {
          ++line_number;
          if (line.empty()) continue;
          try {
            *t = ParseTrialLine(line);
          } catch (const DataError& e) {
            throw DataError(pa.trials + " line " + std::to_string(line_number) + ": " + e.what());
          }
          return true;
        }
        return false;
      };
      summary = ScoreTrials(source, enrolments, tests, scorer, jobs, sink);
    } else {
      TrialGenerator gen(manifest, RestrictionSet::Parse(pa.restrict));
      summary = ScoreTrials(SourceOf(&gen), enrolments, tests, scorer, jobs, sink);
    }
    out->flush();
    if (!*out) throw DataError("failed writing scores");
    Log(LogLevel::kInfo, "score",
        std::to_string(summary.scored) + " scored, " + std::to_string(summary.skipped) + " skipped");
    return 0;
  }
  if (t_generate->parsed()) {
    const Manifest manifest = ReadManifest(ta.manifest);
    TrialGenerator gen(manifest, RestrictionSet::Parse(ta.restrict));
    std::uint64_t n;
    if (ta.out.empty() || ta.out == "-") {
      n = WriteTrials(std::cout, &gen);
      std::cout.flush();
    } else {
      std::ofstream out(ta.out);
      if (!out) throw DataError("cannot write " + ta.out);
      n = WriteTrials(out, &gen);
      if (!out.flush()) throw DataError("failed writing " + ta.out);
    }
    Log(LogLevel::kInfo, "trials", std::to_string(n) + " trials");
    return 0;
  }
  if (t_count->parsed()) {
    TrialCounts c = CountTrials(ReadManifest(ta.manifest), RestrictionSet::Parse(ta.restrict));
    std::cout << "targets\t" << c.targets << "\nnontargets\t" << c.nontargets << "\n";
    return 0;
  }
  if (t_join->parsed()) {
    Manifest joined = ConcatenateSectionE(ReadManifest(ta.manifest), ta.features, ta.out_features);
    WriteManifest(ta.out_manifest, joined);
    return 0;
  }
  if (e_eer->parsed()) {
    std::cout << EerText(ComputeEer(ReadScores(ea.scores)));
    return 0;
  }
  if (e_det->parsed()) {
    WriteOutput(ea.out, FormatDet(ComputeDet(ReadScores(ea.scores))));
    return 0;
  }
  if (e_breakdown->parsed()) {
    const ScoreSet scores = ReadScores(ea.scores);
    const double threshold = ea.threshold ? *ea.threshold : ComputeEer(scores).threshold;
    FaBreakdown b = ComputeFaBreakdown(scores, ReadManifest(ea.manifest),
                                       ParseBreakdownAttribute(ea.attribute), threshold);
    if (b.empty()) Log(LogLevel::kWarning, "breakdown", "no false alarms at this threshold");
    WriteOutput(ea.out, FormatBreakdown(b));
    return 0;
  }
  if (e_fuse->parsed()) {
    WriteOutput(ea.out, SerializeScores(Fuse(ReadScores(ea.a), ReadScores(ea.b), ea.weight_a,
                                             ea.weight_b)));
    return 0;
  }
  if (e_sample->parsed()) {
    SampleResult r = StratifiedSample(ReadManifest(ea.manifest),
                                      ParseBreakdownAttribute(ea.attribute), ea.n, SeedOf(ea.seed));
    WriteOutput(ea.out, SerializeManifest(r.manifest));
    return 0;
  }
  if (s_plda->parsed()) {
    KeyValueConfig config = LoadConfig(sa.config);
    ApplySeed(sa.seed, &config);
    SynthPldaConfig c = SynthPldaConfig::FromConfig(config);
    RejectUnknown(config, "synth plda");
    WritePldaSample(SamplePlda(c), sa.out_dir);
    return 0;
  }
  if (s_corpus->parsed()) {
    KeyValueConfig config = LoadConfig(sa.config);
    ApplySeed(sa.seed, &config);
    SynthCorpusConfig c = SynthCorpusConfig::FromConfig(config);
    RejectUnknown(config, "synth corpus");
    SampleCorpus(c, sa.out_dir);
    return 0;
  }
  if (pipeline->parsed()) {
    KeyValueConfig config = LoadConfig(ra.config);
    ApplySeed(ra.seed, &config);
    if (ra.adapt) config.Set("adapt", "1");
    if (ra.fine_tune) config.Set("fine_tune", "1");
    PipelineResult r = RunPipeline(config, ra.out_dir, jobs);
    std::cout << r.report;
    return 0;
  }
  return 1;
}

}  // namespace verifkit

int main(int argc, char** argv) {
  try {
    return verifkit::Main(argc, argv);
  } catch (const verifkit::Error& e) {
    verifkit::Log(verifkit::LogLevel::kError, "cli", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    verifkit::Log(verifkit::LogLevel::kError, "cli", e.what());
    return 2;
  }
}
