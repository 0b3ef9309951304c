// Copyright 2026 The mixlm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mixlm/commands.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mixlm/aggregate_model.h"
#include "mixlm/cascade.h"
#include "mixlm/conditional_model.h"
#include "mixlm/corpus.h"
#include "mixlm/error.h"
#include "mixlm/eval.h"
#include "mixlm/katz.h"
#include "mixlm/mixed_order_model.h"
#include "mixlm/parallel.h"
#include "mixlm/ngram_counts.h"
#include "mixlm/run_config.h"
#include "mixlm/vocabulary.h"
#include "text_io.h"

namespace mixlm {
namespace {

namespace fs = std::filesystem;

// Files a command produces, written only after all work has succeeded.
class Outputs {
 public:
  void Add(std::string path, std::string contents) {
    files_.emplace_back(std::move(path), std::move(contents));
  }
  void Commit() const {
    for (const auto& [path, contents] : files_) {
      const fs::path parent = fs::path(path).parent_path();
      if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
        if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
      }
      auto out = internal::OpenOutput(path);
      out << contents;
      out.flush();
      if (!out) throw IoError("cannot write " + path);
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

template <class T>
std::string Serialize(const T& object) {
  std::ostringstream out;
  object.Write(out);
  return out.str();
}

template <class T>
T Load(const std::string& path) {
  auto in = internal::OpenInput(path);
  try {
    return T::Read(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string InDir(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void RequireSet(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ParameterError("missing required option --" + flag);
}

void RequireFile(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw IoError(what + " not found: " + path);
}

int Workers(const RunConfig& c) { return c.workers == 0 ? DefaultWorkers() : c.workers; }

std::string FirstLine(const std::string& path) {
  auto in = internal::OpenInput(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::vector<TokenSentence> LoadText(const std::string& path, const Vocabulary& vocab) {
  return TokenizeAll(ReadLinesFromFile(path), vocab);
}

// ---------------------------------------------------------------- prepare

void Prepare(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.corpus, "corpus");
  if (c.skips.empty() && c.max_order < 2) {
    throw ParameterError("nothing to count: max_order < 2 and no skips");
  }
  auto lines = ReadLinesFromFile(c.corpus);
  HeldOutSplit split;
  if (c.valid_frac > 0.0) {
    split = SplitHeldOut(lines, c.valid_frac, c.seed);
  } else {
    split.train = std::move(lines);
  }
  Vocabulary vocab = Vocabulary::Build(split.train, c.vocab_size);
  auto corpus = TokenizeAll(split.train, vocab);
  NgramCounts counts = CountNgrams(corpus, vocab.size(), c.max_order, c.skips, Workers(c));

  outputs.Add(InDir(c.out_dir, "vocab.txt"), Serialize(vocab));
  outputs.Add(InDir(c.out_dir, "counts.txt"), Serialize(counts));
  if (c.valid_frac > 0.0) {
    auto join = [](const std::vector<std::string>& ls) {
      std::string s;
      for (const auto& l : ls) s += l + '\n';
      return s;
    };
    outputs.Add(InDir(c.out_dir, "train.txt"), join(split.train));
    outputs.Add(InDir(c.out_dir, "valid.txt"), join(split.held_out));
  }
  out << "vocabulary: " << vocab.size() << " types\n"
      << "training sentences: " << split.train.size() << "\n"
      << "validation sentences: " << split.held_out.size() << "\n"
      << "prediction events: " << counts.total << "\n";
}

// ---------------------------------------------------------------- training

void TrainAggregateCommand(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.counts, "counts");
  RequireSet(c.output, "output");
  NgramCounts counts = Load<NgramCounts>(c.counts);
  if (counts.max_order < 2) throw ParameterError(c.counts + " holds no bigram counts");
  const int iterations = c.iterations == 0 ? 32 : c.iterations;
  std::pair<AggregateModel, TrainingTrace> result =
      c.identity_init
          ? TrainAggregateFrom(AggregateModel::Identity(counts.vocab_size, c.seed), counts,
                               iterations, Workers(c))
          : TrainAggregate(counts, {c.classes, iterations, c.seed, c.restarts, Workers(c)});
  outputs.Add(c.output, Serialize(result.first));
  std::ostringstream trace;
  result.second.WriteCsv(trace);
  if (!c.trace.empty()) outputs.Add(c.trace, trace.str());
  const auto& rows = result.second.rows;
  out << "classes: " << result.first.num_classes() << "\n";
  if (!rows.empty()) {
    out << "final training perplexity: " << internal::FormatDouble(rows.back().perplexity)
        << "\n";
  }
}

void TrainMixedCommand(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.corpus, "corpus");
  RequireSet(c.vocab, "vocab");
  RequireSet(c.output, "output");
  Vocabulary vocab = Load<Vocabulary>(c.vocab);
  auto corpus = LoadText(c.corpus, vocab);
  const int iterations = c.iterations == 0 ? 4 : c.iterations;
  auto [model, trace] = TrainMixed(corpus, vocab.size(), {c.order, iterations, Workers(c)});
  outputs.Add(c.output, Serialize(model));
  if (!c.trace.empty()) {
    std::ostringstream csv;
    trace.WriteCsv(csv);
    outputs.Add(c.trace, csv.str());
  }
  out << "order: " << model.order() << "\n";
  if (!trace.rows.empty()) {
    out << "final training perplexity: " << internal::FormatDouble(trace.rows.back().perplexity)
        << "\n";
  }
  out << "missing fraction: " << internal::FormatDouble(MissingFraction(model, corpus)) << "\n";
}

// ---------------------------------------------------------------- smoothing

std::string RelativeTo(const std::string& path, const std::string& dir) {
  return fs::proximate(fs::absolute(path), fs::absolute(dir)).generic_string();
}

void Smooth(const RunConfig& c, std::ostream& out, std::ostream& err, Outputs& outputs) {
  RequireSet(c.aggregate, "aggregate");
  RequireSet(c.counts, "counts");
  RequireSet(c.valid, "valid");
  RequireSet(c.vocab, "vocab");
  RequireFile(c.aggregate, "base level (aggregate model)");
  RequireFile(c.counts, "counts file");
  for (std::size_t i = 0; i < c.mixed.size(); ++i) {
    RequireFile(c.mixed[i], "mixed-order level m=" + std::to_string(i + 2) + " model");
  }
  RequireFile(c.valid, "validation text");
  RequireFile(c.vocab, "vocabulary");

  auto base = std::make_shared<AggregateModel>(Load<AggregateModel>(c.aggregate));
  auto counts = std::make_shared<NgramCounts>(Load<NgramCounts>(c.counts));
  std::vector<std::shared_ptr<const MixedOrderModel>> mixed;
  for (const auto& path : c.mixed) {
    mixed.push_back(std::make_shared<MixedOrderModel>(Load<MixedOrderModel>(path)));
  }
  Vocabulary vocab = Load<Vocabulary>(c.vocab);
  if (vocab.size() != counts->vocab_size) {
    throw ParameterError("vocabulary and counts disagree on the vocabulary size");
  }
  auto validation = LoadText(c.valid, vocab);

  CascadeOptions options;
  options.fit.tie_rows = c.tie_rows;
  if (c.trigram) {
    options.trigram = TrigramLevelOptions{static_cast<Count>(c.truncate), c.gt_threshold};
  }
  SmoothedCascade cascade =
      SmoothedCascade::Fit(base, counts, mixed, validation, options);

  CascadeManifest manifest;
  manifest.base_path = RelativeTo(c.aggregate, c.out_dir);
  manifest.counts_path = RelativeTo(c.counts, c.out_dir);
  manifest.bigram_sigma_path = "sigma-bigram.txt";
  outputs.Add(InDir(c.out_dir, "sigma-bigram.txt"), Serialize(cascade.bigram().params()));
  for (int m = 2; m <= cascade.max_order(); ++m) {
    const std::string sigma = "sigma-mixed-" + std::to_string(m) + ".txt";
    manifest.mixed.push_back({m, RelativeTo(c.mixed[m - 2], c.out_dir), sigma});
    outputs.Add(InDir(c.out_dir, sigma), Serialize(cascade.mixed_level(m).params()));
  }
  if (auto trigram = cascade.trigram()) {
    manifest.trigram = CascadeManifest::TrigramLevel{static_cast<Count>(c.truncate),
                                                     c.gt_threshold, "gt-trigram.txt"};
    outputs.Add(InDir(c.out_dir, "gt-trigram.txt"), Serialize(trigram->discounts()));
    for (const auto& w : trigram->discounts().warnings) err << "warning: " << w << "\n";
  }
  outputs.Add(InDir(c.out_dir, "cascade.txt"), Serialize(manifest));
  out << "levels: " << manifest.num_levels() << "\n";
}

// ---------------------------------------------------------------- evaluation

struct LoadedModel {
  std::shared_ptr<const ConditionalModel> model;
  std::shared_ptr<const NgramCounts> counts;   // when the model carries counts
  std::shared_ptr<const KatzModel> katz;       // top-level Katz model, if any
  std::shared_ptr<const MixedOrderModel> mixed;  // unsmoothed mixed model, if any
  WordId vocab_size = 0;
};

std::shared_ptr<const NgramCounts> LoadCounts(const std::string& path) {
  RequireSet(path, "counts");
  return std::make_shared<NgramCounts>(Load<NgramCounts>(path));
}

std::string ResolveModelType(const RunConfig& c) {
  if (c.model_type != "auto") return c.model_type;
  if (!c.manifest.empty()) return "cascade";
  if (c.model == "uniform") return "uniform";
  RequireSet(c.model, "model");
  const std::string line = FirstLine(c.model);
  if (line.rfind("AGG-MODEL", 0) == 0) return "aggregate";
  if (line.rfind("MIX-MODEL", 0) == 0) return "mixed";
  throw ParameterError("cannot tell the model type of " + c.model + "; pass --model-type");
}

LoadedModel LoadModel(const RunConfig& c, const Vocabulary& vocab) {
  LoadedModel m;
  const std::string type = ResolveModelType(c);
  if (type == "uniform") {
    m.model = std::make_shared<UniformModel>(vocab.size());
  } else if (type == "unigram") {
    m.counts = LoadCounts(c.counts);
    m.model = std::make_shared<UnigramModel>(*m.counts);
  } else if (type == "bigram") {
    m.counts = LoadCounts(c.counts);
    m.model = std::make_shared<MlBigramModel>(*m.counts);
  } else if (type == "aggregate") {
    RequireSet(c.model, "model");
    m.model = std::make_shared<AggregateModel>(Load<AggregateModel>(c.model));
  } else if (type == "mixed") {
    RequireSet(c.model, "model");
    m.mixed = std::make_shared<MixedOrderModel>(Load<MixedOrderModel>(c.model));
    m.model = m.mixed;
  } else if (type == "cascade") {
    RequireSet(c.manifest, "manifest");
    auto manifest = Load<CascadeManifest>(c.manifest);
    auto cascade = LoadCascade(manifest, fs::path(c.manifest).parent_path().string());
    m.model = cascade.Top();
    m.counts = cascade.counts();
    m.katz = cascade.trigram();
  } else if (type == "katz-baseline") {
    m.counts = LoadCounts(c.counts);
    m.katz = BuildKatzBaseline(*m.counts, c.truncate, c.gt_threshold);
    m.model = m.katz;
  }
  if (m.model->vocab_size() != vocab.size()) {
    throw ParameterError("model and vocabulary disagree on the vocabulary size");
  }
  return m;
}

SeenPredicate MakePredicate(const RunConfig& c, const LoadedModel& m) {
  if (c.unseen == "none") return nullptr;
  if (c.unseen == "bigram") {
    auto counts = m.counts ? m.counts : LoadCounts(c.counts);
    if (counts->vocab_size != m.model->vocab_size()) {
      throw ParameterError("counts and model disagree on the vocabulary size");
    }
    return BigramSeenPredicate(counts);
  }
  if (!m.katz) throw ParameterError("--unseen trigram needs a model with a trigram level");
  return KatzSeenPredicate(m.katz);
}

void Eval(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.test, "test");
  RequireSet(c.vocab, "vocab");
  Vocabulary vocab = Load<Vocabulary>(c.vocab);
  LoadedModel m = LoadModel(c, vocab);
  SeenPredicate seen = MakePredicate(c, m);
  auto test = LoadText(c.test, vocab);
  EvalReport report = Evaluate(*m.model, test, seen, Workers(c));
  out << report.ToText();
  if (m.mixed) {
    out << "missing_fraction    " << internal::FormatDouble(MissingFraction(*m.mixed, test))
        << "\n";
  }
  if (!c.output.empty()) outputs.Add(c.output, report.ToJson());
}

void SweepTruncate(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.manifest, "manifest");
  RequireSet(c.test, "test");
  RequireSet(c.vocab, "vocab");
  Vocabulary vocab = Load<Vocabulary>(c.vocab);
  auto manifest = Load<CascadeManifest>(c.manifest);
  auto cascade = LoadCascade(manifest, fs::path(c.manifest).parent_path().string());
  if (cascade.max_order() < 2) {
    throw ParameterError("the cascade needs an m=2 level to back off to");
  }
  auto counts = c.counts.empty() ? cascade.counts() : LoadCounts(c.counts);
  if (counts->vocab_size != vocab.size() || cascade.Top()->vocab_size() != vocab.size()) {
    throw ParameterError("vocabulary, counts and cascade disagree on the vocabulary size");
  }
  auto test = LoadText(c.test, vocab);
  auto backoff = cascade.Level(2);

  std::ostringstream csv;
  csv << "t,baseline_perplexity,mixed_perplexity,trigrams,backoff_fraction,"
         "baseline_unseen_perplexity,mixed_unseen_perplexity\n";
  auto fmt = [](const std::optional<double>& v) {
    return v ? internal::FormatDouble(*v) : std::string();
  };
  for (int t = c.truncate; t <= c.truncate_max; ++t) {
    auto baseline = BuildKatzBaseline(*counts, t, c.gt_threshold);
    auto mixed = BuildKatzWithBackoff(*counts, t, c.gt_threshold, backoff);
    EvalReport rb = Evaluate(*baseline, test, KatzSeenPredicate(baseline), Workers(c));
    EvalReport rm = Evaluate(*mixed, test, KatzSeenPredicate(mixed), Workers(c));
    csv << t << ',' << internal::FormatDouble(rb.perplexity) << ','
        << internal::FormatDouble(rm.perplexity) << ',' << mixed->num_ngrams() << ','
        << internal::FormatDouble(rm.unseen_fraction) << ',' << fmt(rb.unseen_perplexity) << ','
        << fmt(rm.unseen_perplexity) << '\n';
  }
  if (c.output.empty()) {
    out << csv.str();
  } else {
    outputs.Add(c.output, csv.str());
  }
}

// ---------------------------------------------------------------- reports

void ReportClasses(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.model, "model");
  RequireSet(c.vocab, "vocab");
  Vocabulary vocab = Load<Vocabulary>(c.vocab);
  AggregateModel model = Load<AggregateModel>(c.model);
  if (model.vocab_size() != vocab.size()) {
    throw ParameterError("model and vocabulary disagree on the vocabulary size");
  }
  auto assignments = ClassAssignments(model);
  // Vocabulary ids past the reserved tokens are in frequency order.
  std::map<int, std::vector<std::string>> groups;
  const WordId last = std::min<WordId>(vocab.size(), kNumReserved + c.top_n);
  for (WordId w = kNumReserved; w < last; ++w) {
    groups[assignments[w].best_class].push_back(vocab.Word(w));
  }
  for (const auto& [cls, words] : groups) {
    out << cls << ':';
    for (const auto& w : words) out << ' ' << w;
    out << '\n';
  }
  if (!c.output.empty()) {
    std::ostringstream csv;
    csv << "word,max_prob\n";
    for (WordId w = kNumReserved; w < vocab.size(); ++w) {
      csv << vocab.Word(w) << ',' << internal::FormatDouble(assignments[w].max_prob) << '\n';
    }
    outputs.Add(c.output, csv.str());
  }
}

void ReportLambda(const RunConfig& c, std::ostream& out, Outputs& outputs) {
  RequireSet(c.model, "model");
  RequireSet(c.vocab, "vocab");
  RequireSet(c.counts, "counts");
  Vocabulary vocab = Load<Vocabulary>(c.vocab);
  MixedOrderModel model = Load<MixedOrderModel>(c.model);
  NgramCounts counts = Load<NgramCounts>(c.counts);
  if (model.vocab_size() != vocab.size() || counts.vocab_size != vocab.size()) {
    throw ParameterError("model, counts and vocabulary disagree on the vocabulary size");
  }
  // Reserved tokens are excluded from the frequency ranking.
  std::vector<Count> unigrams = counts.unigrams;
  for (WordId w = 0; w < kNumReserved; ++w) unigrams[w] = 0;
  LambdaReport report = ReportLambdas(model, unigrams, c.top_n, c.list_size);
  std::ostringstream csv;
  csv << "list,word,lambda1\n";
  auto emit = [&](const char* name, const std::vector<WordId>& words) {
    out << name << ':';
    for (WordId w : words) {
      out << ' ' << vocab.Word(w);
      csv << name << ',' << vocab.Word(w) << ',' << internal::FormatDouble(model.Lambda(w, 1))
          << '\n';
    }
    out << '\n';
  };
  emit("low", report.low);
  emit("high", report.high);
  if (!c.output.empty()) outputs.Add(c.output, csv.str());
}

// ---------------------------------------------------------------- parsing

struct Flag {
  std::string key;
  bool boolean = false;
};

const std::map<std::string, std::vector<Flag>>& CommandFlags() {
  static const std::map<std::string, std::vector<Flag>> flags = {
      {"prepare",
       {{"corpus"}, {"out_dir"}, {"vocab_size"}, {"max_order"}, {"skips"}, {"valid_frac"},
        {"seed"}, {"workers"}}},
      {"train-aggregate",
       {{"counts"}, {"output"}, {"trace"}, {"classes"}, {"iterations"}, {"seed"},
        {"restarts"}, {"identity_init", true}, {"workers"}}},
      {"train-mixed",
       {{"corpus"}, {"vocab"}, {"output"}, {"trace"}, {"order"}, {"iterations"}, {"workers"}}},
      {"smooth",
       {{"aggregate"}, {"counts"}, {"mixed"}, {"valid"}, {"vocab"}, {"out_dir"},
        {"trigram", true}, {"truncate"}, {"gt_threshold"}, {"tie_rows", true}}},
      {"eval",
       {{"model"}, {"model_type"}, {"manifest"}, {"counts"}, {"vocab"}, {"test"}, {"unseen"},
        {"output"}, {"truncate"}, {"gt_threshold"}, {"workers"}}},
      {"sweep-truncate",
       {{"manifest"}, {"counts"}, {"vocab"}, {"test"}, {"truncate"}, {"truncate_max"},
        {"gt_threshold"}, {"output"}, {"workers"}}},
      {"report-classes", {{"model"}, {"vocab"}, {"top_n"}, {"output"}}},
      {"report-lambda",
       {{"model"}, {"vocab"}, {"counts"}, {"top_n"}, {"list_size"}, {"output"}}},
  };
  return flags;
}

std::string FlagName(const std::string& key) {
  if (key == "iterations") return "--iters,--iterations";
  std::string name = "--" + key;
  for (char& ch : name) {
    if (ch == '_') ch = '-';
  }
  return name;
}

int Dispatch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Outputs outputs;
  const std::string& cmd = c.subcommand;
  if (cmd == "prepare") {
    Prepare(c, out, outputs);
  } else if (cmd == "train-aggregate") {
    TrainAggregateCommand(c, out, outputs);
  } else if (cmd == "train-mixed") {
    TrainMixedCommand(c, out, outputs);
  } else if (cmd == "smooth") {
    Smooth(c, out, err, outputs);
  } else if (cmd == "eval") {
    Eval(c, out, outputs);
  } else if (cmd == "sweep-truncate") {
    SweepTruncate(c, out, outputs);
  } else if (cmd == "report-classes") {
    ReportClasses(c, out, outputs);
  } else if (cmd == "report-lambda") {
    ReportLambda(c, out, outputs);
  }
  outputs.Commit();
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aggregate and mixed-order Markov language models", "mixlm"};
  app.require_subcommand(1);
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::string> config_paths;
  for (const auto& [name, flags] : CommandFlags()) {
    CLI::App* sub = app.add_subcommand(name);
    subs[name] = sub;
    sub->add_option("--config", config_paths[name], "key = value file; flags override it");
    for (const auto& flag : flags) {
      if (flag.boolean) {
        sub->add_flag(FlagName(flag.key), switches[name + "/" + flag.key]);
      } else if (flag.key == "mixed") {
        sub->add_option(FlagName(flag.key), values[name + "/" + flag.key],
                        "mixed-order model files for m = 2, 3, ... (comma separated)")
            ->delimiter('\0');
      } else {
        sub->add_option(FlagName(flag.key), values[name + "/" + flag.key]);
      }
    }
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* shown = &app;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) shown = sub;
    }
    out << shown->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::string name;
    for (const auto& [n, sub] : subs) {
      if (sub->parsed()) name = n;
    }
    CLI::App* sub = subs.at(name);
    RunConfig config = config_paths[name].empty() ? RunConfig{}
                                                  : RunConfig::FromFile(config_paths[name]);
    config.subcommand = name;
    for (const auto& flag : CommandFlags().at(name)) {
      const std::string slot = name + "/" + flag.key;
      const std::string option = FlagName(flag.key).substr(0, FlagName(flag.key).find(','));
      if (sub->get_option(option)->count() == 0) continue;
      config.Set(flag.key, flag.boolean ? (switches[slot] ? "true" : "false") : values[slot]);
    }
    config.Validate();
    return Dispatch(config, out, err);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mixlm
