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

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mixlm/commands.h"
#include "mixlm/corpus.h"
#include "mixlm/error.h"
#include "mixlm/run_config.h"
#include "mixlm/vocabulary.h"
#include "test_util.h"

namespace fs = std::filesystem;

namespace mixlm {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Run(std::vector<std::string> args) {
  args.insert(args.begin(), "mixlm");
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

// Text corpus over words w0..w{n-1} from a peaked chain.
std::string ChainText(Rng& rng, int words, int sentences) {
  std::ostringstream text;
  for (int s = 0; s < sentences; ++s) {
    int prev = static_cast<int>(rng.Below(words));
    const int len = 1 + static_cast<int>(rng.Below(8));
    for (int i = 0; i < len; ++i) {
      const int w = rng.Uniform() < 0.7 ? (prev * 7 + 3) % words
                                        : static_cast<int>(rng.Below(words));
      text << (i ? " " : "") << 'w' << w;
      prev = w;
    }
    text << '\n';
  }
  return text.str();
}

std::vector<std::string> CsvLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> Fields(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream in(line);
  for (std::string x; std::getline(in, x, ',');) f.push_back(x);
  if (!line.empty() && line.back() == ',') f.push_back("");
  return f;
}

// A prepared working directory shared by the pipeline tests.
struct Workspace {
  fs::path dir;
  std::string P(const std::string& name) const { return (dir / name).string(); }
};

Workspace Prepared(const std::string& name) {
  Workspace w{testing::TempDir(name)};
  Rng rng(11);
  testing::WriteFile(w.dir / "corpus.txt", ChainText(rng, 40, 600));
  testing::WriteFile(w.dir / "test.txt", ChainText(rng, 40, 100));
  Result r = Run({"prepare", "--corpus", w.P("corpus.txt"), "--out-dir", w.P(""),
                  "--vocab-size", "30"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return w;
}

TEST_CASE("run config round-trips through text") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    RunConfig c;
    c.subcommand = "eval";
    c.corpus = "dir/corpus " + std::to_string(rng.Below(100)) + ".txt";
    c.mixed = {"a.txt", "b" + std::to_string(rng.Below(9)) + ".txt"};
    c.vocab_size = 4 + static_cast<int>(rng.Below(10000));
    c.skips = {1, 1 + static_cast<int>(rng.Below(5))};
    c.seed = rng.Below(1u << 30);
    c.valid_frac = rng.Uniform(0.0, 0.9);
    c.tie_rows = rng.Below(2);
    c.trigram = rng.Below(2);
    c.unseen = rng.Below(2) ? "bigram" : "none";
    c.iterations = static_cast<int>(rng.Below(100));
    std::stringstream text;
    c.WriteText(text);
    RunConfig back = RunConfig::FromText(text);
    back.subcommand = c.subcommand;
    CHECK(back == c);
  }
}

TEST_CASE("run config rejects bad input") {
  std::istringstream unknown("classes = 3\nbogus = 1\n");
  CHECK_THROWS_AS(RunConfig::FromText(unknown), ParameterError);
  std::istringstream bad_int("classes = three\n");
  CHECK_THROWS_AS(RunConfig::FromText(bad_int), ParameterError);
  std::istringstream comments("# comment\n\nclasses = 7  \n");
  CHECK(RunConfig::FromText(comments).classes == 7);

  RunConfig c;
  c.subcommand = "train-aggregate";
  c.Validate();
  c.classes = 0;
  CHECK_THROWS_AS(c.Validate(), ParameterError);
  c = RunConfig{};
  c.subcommand = "eval";
  c.model_type = "trigram";
  CHECK_THROWS_AS(c.Validate(), ParameterError);
  c = RunConfig{};
  c.subcommand = "prepare";
  c.valid_frac = 1.0;
  CHECK_THROWS_AS(c.Validate(), ParameterError);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(Run({}).code == kExitUsage);
  CHECK(Run({"frobnicate"}).code == kExitUsage);
  CHECK(Run({"prepare", "--no-such-flag", "1"}).code == kExitUsage);
  CHECK(Run({"prepare", "--help"}).code == kExitOk);
  Result missing = Run({"prepare", "--corpus", "/nonexistent/corpus.txt", "--out-dir", "/tmp"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("/nonexistent/corpus.txt") != std::string::npos);
  Workspace w = Prepared("cli_usage");
  CHECK(Run({"train-aggregate", "--counts", w.P("counts.txt"), "--output", w.P("a.txt"),
             "--classes", "0"})
            .code == kExitUsage);
  CHECK_FALSE(fs::exists(w.dir / "a.txt"));
}

TEST_CASE("prepare on a tiny corpus") {
  fs::path dir = testing::TempDir("cli_prepare");
  testing::WriteFile(dir / "c.txt", "the cat sat\nthe dog sat\na cat ran\n");
  Result r = Run({"prepare", "--corpus", (dir / "c.txt").string(), "--out-dir", dir.string(),
                  "--vocab-size", "10", "--valid-frac", "0"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream vin(testing::ReadFile(dir / "vocab.txt"));
  Vocabulary v = Vocabulary::Read(vin);
  CHECK(v.size() == 9);  // six word types plus the reserved tokens
  CHECK(v.Word(kNumReserved) == "cat");
  CHECK(v.Contains("ran"));
  std::istringstream cin(testing::ReadFile(dir / "counts.txt"));
  NgramCounts counts = NgramCounts::Read(cin);
  CHECK(counts.total == 12);
  CHECK(counts.unigrams[kEndId] == 3);
  CHECK(counts.bigrams.Get(v.Lookup("the"), v.Lookup("cat")) == 1);
  CHECK(counts.trigrams.Get(kStartId, v.Lookup("the"), v.Lookup("dog")) == 1);
  CHECK_FALSE(fs::exists(dir / "valid.txt"));
}

TEST_CASE("identical runs write identical bytes") {
  Workspace a = Prepared("cli_det_a");
  Workspace b = Prepared("cli_det_b");
  for (const char* f : {"vocab.txt", "counts.txt", "train.txt", "valid.txt"}) {
    CHECK(testing::ReadFile(a.dir / f) == testing::ReadFile(b.dir / f));
  }
  for (const Workspace* w : {&a, &b}) {
    REQUIRE(Run({"train-aggregate", "--counts", w->P("counts.txt"), "--classes", "3",
                 "--iters", "5", "--output", w->P("agg.txt"), "--workers", w == &a ? "1" : "3"})
                .code == 0);
  }
  CHECK(testing::ReadFile(a.dir / "agg.txt") == testing::ReadFile(b.dir / "agg.txt"));
}

TEST_CASE("aggregate training trace") {
  Workspace w = Prepared("cli_agg");
  Result r = Run({"train-aggregate", "--counts", w.P("counts.txt"), "--classes", "2",
                  "--output", w.P("agg.txt"), "--trace", w.P("trace.csv")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto lines = CsvLines(testing::ReadFile(w.dir / "trace.csv"));
  REQUIRE(lines.size() == 33);
  CHECK(lines[0] == "iteration,loglik,train_perplexity");
  double previous = INFINITY;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = Fields(lines[i]);
    CHECK(std::stoi(f[0]) == static_cast<int>(i));
    const double ppl = std::stod(f[2]);
    CHECK(ppl <= previous * (1 + 1e-12));
    previous = ppl;
  }
  Result rc = Run({"report-classes", "--model", w.P("agg.txt"), "--vocab", w.P("vocab.txt"),
                   "--top-n", "10", "--output", w.P("classes.csv")});
  REQUIRE(rc.code == 0);
  auto cl = CsvLines(testing::ReadFile(w.dir / "classes.csv"));
  CHECK(cl[0] == "word,max_prob");
  CHECK(cl.size() == 1 + 30 - kNumReserved);  // every word, not only the top 10
}

TEST_CASE("mixed m=1 reproduces the ML bigram") {
  Workspace w = Prepared("cli_mixed");
  Result r = Run({"train-mixed", "--corpus", w.P("train.txt"), "--vocab", w.P("vocab.txt"),
                  "--order", "1", "--iters", "1", "--output", w.P("m1.txt"), "--trace",
                  w.P("m1.csv")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream vin(testing::ReadFile(w.dir / "vocab.txt"));
  Vocabulary v = Vocabulary::Read(vin);
  auto corpus = TokenizeAll(ReadLinesFromFile(w.P("train.txt")), v);
  std::map<std::pair<WordId, WordId>, double> pair;
  std::map<WordId, double> row;
  auto events = testing::Events(corpus, 1);
  for (const auto& e : events) ++pair[{e.history[0], e.next}], ++row[e.history[0]];
  double ll = 0.0;
  for (const auto& e : events) ll += std::log(pair[{e.history[0], e.next}] / row[e.history[0]]);
  const double oracle = std::exp(-ll / events.size());
  auto lines = CsvLines(testing::ReadFile(w.dir / "m1.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(std::abs(std::stod(Fields(lines[1])[2]) - oracle) < 1e-9 * oracle);

  Result rl = Run({"report-lambda", "--model", w.P("m1.txt"), "--vocab", w.P("vocab.txt"),
                   "--counts", w.P("counts.txt")});
  CHECK(rl.code == kExitUsage);
}

TEST_CASE("smooth, eval and sweep") {
  Workspace w = Prepared("cli_pipeline");
  REQUIRE(Run({"train-aggregate", "--counts", w.P("counts.txt"), "--classes", "4", "--iters",
               "8", "--output", w.P("agg.txt")})
              .code == 0);
  for (const char* m : {"2", "3"}) {
    REQUIRE(Run({"train-mixed", "--corpus", w.P("train.txt"), "--vocab", w.P("vocab.txt"),
                 "--order", m, "--output", w.P(std::string("mix") + m + ".txt")})
                .code == 0);
  }
  const std::vector<std::string> base = {"smooth", "--aggregate", w.P("agg.txt"), "--counts",
                                         w.P("counts.txt"), "--valid", w.P("valid.txt"),
                                         "--vocab", w.P("vocab.txt"), "--trigram"};

  // A missing level is named and nothing is written.
  auto bad = base;
  bad.insert(bad.end(), {"--mixed", w.P("mix2.txt") + "," + w.P("nope.txt"), "--out-dir",
                         w.P("bad")});
  Result rb = Run(bad);
  CHECK(rb.code == kExitUsage);
  CHECK(rb.err.find("m=3") != std::string::npos);
  CHECK_FALSE(fs::exists(w.dir / "bad" / "cascade.txt"));
  CHECK_FALSE(fs::exists(w.dir / "bad" / "sigma-bigram.txt"));

  auto good = base;
  good.insert(good.end(), {"--mixed", w.P("mix2.txt") + "," + w.P("mix3.txt"), "--out-dir",
                           w.P("casc")});
  Result rs = Run(good);
  REQUIRE_MESSAGE(rs.code == 0, rs.err);
  CHECK(rs.out.find("levels: 5") != std::string::npos);
  for (const char* f : {"cascade.txt", "sigma-bigram.txt", "sigma-mixed-2.txt",
                        "sigma-mixed-3.txt", "gt-trigram.txt"}) {
    CHECK(fs::exists(w.dir / "casc" / f));
  }

  Result re = Run({"eval", "--manifest", w.P("casc/cascade.txt"), "--vocab", w.P("vocab.txt"),
                   "--test", w.P("test.txt"), "--unseen", "trigram", "--output",
                   w.P("eval.json")});
  REQUIRE_MESSAGE(re.code == 0, re.err);
  auto j = nlohmann::json::parse(testing::ReadFile(w.dir / "eval.json"));
  CHECK(j.contains("unseen_perplexity"));
  CHECK(j["zero_events"] == 0);
  CHECK(j["perplexity"].get<double>() > 1.0);

  Result rbg = Run({"eval", "--model", w.P("agg.txt"), "--vocab", w.P("vocab.txt"), "--test",
                    w.P("test.txt"), "--unseen", "bigram", "--counts", w.P("counts.txt"),
                    "--output", w.P("agg.json")});
  REQUIRE_MESSAGE(rbg.code == 0, rbg.err);
  auto ja = nlohmann::json::parse(testing::ReadFile(w.dir / "agg.json"));
  CHECK(ja.contains("unseen_perplexity"));

  Result ru = Run({"eval", "--model", "uniform", "--vocab", w.P("vocab.txt"), "--test",
                   w.P("test.txt"), "--output", w.P("u.json")});
  REQUIRE(ru.code == 0);
  auto ju = nlohmann::json::parse(testing::ReadFile(w.dir / "u.json"));
  CHECK(std::abs(ju["perplexity"].get<double>() - 30.0) < 1e-9);

  Result rm = Run({"eval", "--model", w.P("mix3.txt"), "--vocab", w.P("vocab.txt"), "--test",
                   w.P("test.txt")});
  REQUIRE(rm.code == 0);
  CHECK(rm.out.find("missing_fraction") != std::string::npos);

  Result rw = Run({"sweep-truncate", "--manifest", w.P("casc/cascade.txt"), "--vocab",
                   w.P("vocab.txt"), "--test", w.P("test.txt"), "--output", w.P("sweep.csv")});
  REQUIRE_MESSAGE(rw.code == 0, rw.err);
  auto lines = CsvLines(testing::ReadFile(w.dir / "sweep.csv"));
  REQUIRE(lines.size() == 6);
  CHECK(Fields(lines[0]).size() == 7);
  long previous = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = Fields(lines[i]);
    CHECK(std::stoi(f[0]) == static_cast<int>(i));
    const long trigrams = std::stol(f[3]);
    if (previous >= 0) CHECK(trigrams <= previous);
    previous = trigrams;
  }

  Result rl = Run({"report-lambda", "--model", w.P("mix2.txt"), "--vocab", w.P("vocab.txt"),
                   "--counts", w.P("counts.txt"), "--top-n", "20", "--list-size", "3",
                   "--output", w.P("lambda.csv")});
  REQUIRE_MESSAGE(rl.code == 0, rl.err);
  auto ll = CsvLines(testing::ReadFile(w.dir / "lambda.csv"));
  CHECK(ll[0] == "list,word,lambda1");
  CHECK(ll.size() == 7);
}

TEST_CASE("config file values and flag overrides") {
  Workspace w = Prepared("cli_config");
  testing::WriteFile(w.dir / "run.cfg", "counts = " + w.P("counts.txt") +
                                            "\nclasses = 2\niterations = 3\noutput = " +
                                            w.P("cfg.txt") + "\n");
  Result r = Run({"train-aggregate", "--config", w.P("run.cfg"), "--classes", "5"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("classes: 5") != std::string::npos);
  CHECK(testing::ReadFile(w.dir / "cfg.txt").rfind("AGG-MODEL v1 V=30 C=5", 0) == 0);
  testing::WriteFile(w.dir / "bad.cfg", "colour = blue\n");
  CHECK(Run({"train-aggregate", "--config", w.P("bad.cfg")}).code == kExitUsage);
}

TEST_CASE("data errors exit with 3") {
  Workspace w = Prepared("cli_data");
  testing::WriteFile(w.dir / "empty.txt", "");
  Result r = Run({"eval", "--model", "uniform", "--vocab", w.P("vocab.txt"), "--test",
                  w.P("empty.txt")});
  CHECK(r.code == kExitData);
}

}  // namespace
}  // namespace mixlm
