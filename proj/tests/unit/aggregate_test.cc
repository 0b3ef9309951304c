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

#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "mixlm/aggregate_model.h"
#include "mixlm/error.h"
#include "mixlm/ngram_counts.h"
#include "test_util.h"

namespace mixlm {
namespace {

// Dense reference EM step written directly from the update equations.
struct DenseStep {
  std::vector<std::vector<double>> class_given_word;  // V x C
  std::vector<std::vector<double>> word_given_class;  // C x V
  double log_likelihood = 0.0;
};

DenseStep OracleStep(const AggregateModel& m, const NgramCounts& counts) {
  const WordId V = m.vocab_size();
  const int C = m.num_classes();
  std::vector<std::vector<double>> cw(V, std::vector<double>(C, 0.0));
  std::vector<std::vector<double>> wc(C, std::vector<double>(V, 0.0));
  DenseStep out;
  for (WordId w1 = 0; w1 < V; ++w1) {
    for (WordId w2 = 0; w2 < V; ++w2) {
      const double n = static_cast<double>(counts.bigrams.Get(w1, w2));
      if (n == 0) continue;
      double z = 0.0;
      for (int c = 0; c < C; ++c) z += m.WordRow(c)[w2] * m.ClassRow(w1)[c];
      out.log_likelihood += n * std::log(z);
      for (int c = 0; c < C; ++c) {
        const double post = m.WordRow(c)[w2] * m.ClassRow(w1)[c] / z;
        cw[w1][c] += n * post;
        wc[c][w2] += n * post;
      }
    }
  }
  out.class_given_word.resize(V);
  for (WordId w = 0; w < V; ++w) {
    double t = 0.0;
    for (double x : cw[w]) t += x;
    for (int c = 0; c < C; ++c) {
      out.class_given_word[w].push_back(t > 0 ? cw[w][c] / t : m.ClassRow(w)[c]);
    }
  }
  out.word_given_class.resize(C);
  for (int c = 0; c < C; ++c) {
    double t = 0.0;
    for (double x : wc[c]) t += x;
    for (WordId w = 0; w < V; ++w) {
      out.word_given_class[c].push_back(t > 0 ? wc[c][w] / t : m.WordRow(c)[w]);
    }
  }
  return out;
}

void CheckNormalized(const AggregateModel& m, double tol) {
  for (WordId w = 0; w < m.vocab_size(); ++w) {
    double t = 0.0;
    for (double x : m.ClassRow(w)) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      t += x;
    }
    CHECK(t == doctest::Approx(1.0).epsilon(tol));
  }
  for (int c = 0; c < m.num_classes(); ++c) {
    double t = 0.0;
    for (double x : m.WordRow(c)) t += x;
    CHECK(t == doctest::Approx(1.0).epsilon(tol));
  }
}

TEST_CASE("random init shapes") {
  AggregateModel one = AggregateModel::Random(5, 1, 3);
  for (WordId w = 0; w < 5; ++w) CHECK(one.ClassRow(w)[0] == 1.0);
  CheckNormalized(one, 1e-12);
  AggregateModel five = AggregateModel::Random(5, 5, 7);
  CheckNormalized(five, 1e-12);
  CHECK(AggregateModel::Random(5, 5, 7) == five);
  CHECK_FALSE(AggregateModel::Random(5, 5, 8) == five);
  CHECK_THROWS_AS(AggregateModel::Random(5, 0, 1), ParameterError);
  CHECK_THROWS_AS(AggregateModel::Random(5, 6, 1), ParameterError);
}

TEST_CASE("class-based probability by hand") {
  AggregateModel m(5, 2);
  const WordId a = 3, b = 4;
  m.MutableClassRow(a)[0] = 0.5;
  m.MutableClassRow(a)[1] = 0.5;
  m.MutableWordRow(0)[b] = 0.2;
  m.MutableWordRow(1)[b] = 0.6;
  CHECK(m.Prob(a, b) == doctest::Approx(0.4).epsilon(1e-15));
  const WordId ctx[] = {a};
  CHECK(m.Prob(ctx, b) == m.Prob(a, b));
  CHECK_THROWS_AS(m.Prob(a, 5), ParameterError);
  CHECK_THROWS_AS(m.Prob(-1, b), ParameterError);
}

TEST_CASE("one class is a unigram over successors") {
  AggregateModel m = AggregateModel::Random(6, 1, 2);
  for (WordId w1 = 0; w1 < 6; ++w1) {
    for (WordId w2 = 0; w2 < 6; ++w2) CHECK(m.Prob(w1, w2) == m.WordRow(0)[w2]);
  }
}

TEST_CASE("rows of the implied matrix sum to one") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const WordId V = 4 + static_cast<WordId>(rng.Below(5));
    AggregateModel m = AggregateModel::Random(V, 1 + rng.Below(V), rng.Below(1000));
    for (WordId w = 0; w < V; ++w) CHECK(testing::SumOverVocab(m, {w}) == doctest::Approx(1.0));
  }
}

TEST_CASE("one EM step with one class lands on the successor unigram") {
  Rng rng(2);
  auto corpus = testing::RandomCorpus(rng, 7, 10, 5);
  NgramCounts counts = CountNgrams(corpus, 7, 2, {});
  AggregateStep step = EmStepAggregate(AggregateModel::Random(7, 1, 4), counts);
  const double total = static_cast<double>(counts.bigrams.Total());
  std::vector<double> uni(7, 0.0);
  counts.bigrams.ForEach([&](WordId, WordId w2, Count n) { uni[w2] += n / total; });
  for (WordId w = 0; w < 7; ++w) CHECK(step.model.WordRow(0)[w] == doctest::Approx(uni[w]));
  AggregateStep again = EmStepAggregate(step.model, counts);
  for (WordId w = 0; w < 7; ++w) {
    CHECK(again.model.WordRow(0)[w] == doctest::Approx(step.model.WordRow(0)[w]).epsilon(1e-14));
  }
}

TEST_CASE("a single bigram is learned in one step") {
  NgramCounts counts;
  counts.vocab_size = 5;
  counts.max_order = 2;
  counts.unigrams.assign(5, 0);
  counts.bigrams.Add(3, 4, 1);
  counts.total = 1;
  AggregateStep step = EmStepAggregate(AggregateModel::Random(5, 2, 9), counts);
  CHECK(step.model.WordRow(0)[4] == doctest::Approx(1.0));
  CHECK(step.model.WordRow(1)[4] == doctest::Approx(1.0));
  CHECK(step.model.Prob(3, 4) == doctest::Approx(1.0));
}

TEST_CASE("empty bigram table is an error") {
  NgramCounts counts;
  counts.vocab_size = 5;
  counts.max_order = 2;
  counts.unigrams.assign(5, 0);
  CHECK_THROWS_WITH_AS(EmStepAggregate(AggregateModel::Random(5, 2, 1), counts),
                       "no bigram events", DataError);
}

TEST_CASE("posteriors and updates match dense enumeration") {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const WordId V = 4 + static_cast<WordId>(rng.Below(2));  // V <= 5
    const int C = 1 + static_cast<int>(rng.Below(V));
    auto corpus = testing::RandomCorpus(rng, V, 1 + rng.Below(6), 5);
    NgramCounts counts = CountNgrams(corpus, V, 2, {});
    AggregateModel m = AggregateModel::Random(V, C, rng.Below(1 << 20));
    DenseStep oracle = OracleStep(m, counts);
    for (const auto& e : counts.bigrams.Sorted()) {
      auto post = ClassPosterior(m, e.first, e.second);
      double sum = 0.0;
      for (int c = 0; c < C; ++c) {
        const double expect = m.WordRow(c)[e.second] * m.ClassRow(e.first)[c] /
                              m.Prob(e.first, e.second);
        CHECK(std::abs(post[c] - expect) < 1e-10);
        sum += post[c];
      }
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
    AggregateStep step = EmStepAggregate(m, counts);
    CHECK(std::abs(step.log_likelihood - oracle.log_likelihood) < 1e-10);
    CHECK(std::abs(step.log_likelihood - AggregateLogLikelihood(m, counts)) < 1e-10);
    for (WordId w = 0; w < V; ++w) {
      for (int c = 0; c < C; ++c) {
        CHECK(std::abs(step.model.ClassRow(w)[c] - oracle.class_given_word[w][c]) < 1e-10);
        CHECK(std::abs(step.model.WordRow(c)[w] - oracle.word_given_class[c][w]) < 1e-10);
      }
    }
  }
}

TEST_CASE("EM never lowers the likelihood and keeps rows normalized") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const WordId V = 4 + static_cast<WordId>(rng.Below(17));  // V <= 20
    const int C = 1 + static_cast<int>(rng.Below(4));
    auto corpus = testing::RandomCorpus(rng, V, 1 + rng.Below(15), 8);
    NgramCounts counts = CountNgrams(corpus, V, 2, {});
    AggregateModel m = AggregateModel::Random(V, std::min<int>(C, V), rng.Below(1 << 20));
    double previous = -INFINITY;
    for (int it = 0; it < 32; ++it) {
      AggregateStep step = EmStepAggregate(m, counts);
      CHECK(step.log_likelihood >= previous - 1e-9);
      previous = step.log_likelihood;
      m = std::move(step.model);
      CheckNormalized(m, 1e-9);
    }
    CHECK(AggregateLogLikelihood(m, counts) >= previous - 1e-9);
  }
}

TEST_CASE("trace has one row per iteration and non-increasing perplexity") {
  Rng rng(5);
  auto corpus = testing::RandomCorpus(rng, 15, 40, 10);
  NgramCounts counts = CountNgrams(corpus, 15, 2, {});
  auto [model, trace] = TrainAggregate(counts, {3, 32, 11, 1, 1});
  REQUIRE(trace.rows.size() == 32);
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    CHECK(trace.rows[i].iteration == static_cast<int>(i) + 1);
    CHECK(trace.rows[i].perplexity ==
          doctest::Approx(std::exp(-trace.rows[i].log_likelihood /
                                   static_cast<double>(counts.bigrams.Total())))
              .epsilon(1e-12));
    if (i) CHECK(trace.rows[i].perplexity <= trace.rows[i - 1].perplexity * (1 + 1e-12));
  }
  CHECK(trace.rows.back().log_likelihood ==
        doctest::Approx(AggregateLogLikelihood(model, counts)).epsilon(1e-14));
}

TEST_CASE("training is deterministic and worker-independent") {
  Rng rng(6);
  auto corpus = testing::RandomCorpus(rng, 25, 300, 10);
  NgramCounts counts = CountNgrams(corpus, 25, 2, {});
  auto one = TrainAggregate(counts, {4, 5, 3, 1, 1}).first;
  CHECK(TrainAggregate(counts, {4, 5, 3, 1, 1}).first == one);
  CHECK(TrainAggregate(counts, {4, 5, 3, 1, 4}).first == one);
}

TEST_CASE("restarts keep the best run") {
  Rng rng(7);
  auto corpus = testing::RandomCorpus(rng, 12, 30, 8);
  NgramCounts counts = CountNgrams(corpus, 12, 2, {});
  double best = -INFINITY;
  for (std::uint64_t seed = 20; seed < 23; ++seed) {
    best = std::max(best, TrainAggregate(counts, {3, 6, seed, 1, 1}).second.rows.back().log_likelihood);
  }
  auto [model, trace] = TrainAggregate(counts, {3, 6, 20, 3, 1});
  CHECK(trace.rows.back().log_likelihood == best);
}

TEST_CASE("limit cases reproduce unigram and bigram likelihoods") {
  Rng rng(8);
  auto corpus = testing::RandomCorpus(rng, 10, 30, 8);
  NgramCounts counts = CountNgrams(corpus, 10, 2, {});
  const double N = static_cast<double>(counts.bigrams.Total());
  double unigram_ll = 0.0, bigram_ll = 0.0;
  std::vector<double> succ(10, 0.0);
  counts.bigrams.ForEach([&](WordId, WordId w2, Count n) { succ[w2] += n; });
  auto rows = counts.bigrams.RowTotals(10);
  counts.bigrams.ForEach([&](WordId w1, WordId w2, Count n) {
    unigram_ll += n * std::log(succ[w2] / N);
    bigram_ll += n * std::log(n / static_cast<double>(rows[w1]));
  });
  auto c1 = TrainAggregate(counts, {1, 32, 1, 1, 1}).second.rows.back();
  CHECK(c1.log_likelihood == doctest::Approx(unigram_ll).epsilon(1e-12));
  auto cv = TrainAggregateFrom(AggregateModel::Identity(10, 1), counts, 32).second.rows.back();
  CHECK(cv.log_likelihood == doctest::Approx(bigram_ll).epsilon(1e-12));
}

TEST_CASE("implied transition matrix has rank at most C") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const WordId V = 8 + static_cast<WordId>(rng.Below(8));
    const int C = 1 + static_cast<int>(rng.Below(4));
    AggregateModel m = AggregateModel::Random(V, C, rng.Below(1 << 20));
    auto corpus = testing::RandomCorpus(rng, V, 20, 8);
    m = TrainAggregateFrom(m, CountNgrams(corpus, V, 2, {}), 3).first;
    Eigen::MatrixXd p(V, V);
    for (WordId i = 0; i < V; ++i) {
      for (WordId j = 0; j < V; ++j) p(i, j) = m.Prob(i, j);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(p);
    lu.setThreshold(1e-10);
    CHECK(lu.rank() <= C);
  }
}

TEST_CASE("positive factors give every bigram positive probability") {
  AggregateModel r = AggregateModel::Random(12, 3, 2);
  for (WordId w1 = 0; w1 < 12; ++w1) {
    for (WordId w2 = 0; w2 < 12; ++w2) CHECK(r.Prob(w1, w2) > 0.0);
  }
}

TEST_CASE("class assignments break ties toward the lowest class") {
  AggregateModel one = AggregateModel::Random(5, 1, 1);
  for (const auto& a : ClassAssignments(one)) {
    CHECK(a.best_class == 0);
    CHECK(a.max_prob == 1.0);
  }
  AggregateModel m = AggregateModel::Random(5, 2, 1);
  m.MutableClassRow(3)[0] = 0.5;
  m.MutableClassRow(3)[1] = 0.5;
  m.MutableClassRow(4)[0] = 0.3;
  m.MutableClassRow(4)[1] = 0.7;
  auto as = ClassAssignments(m);
  CHECK(as[3].best_class == 0);
  CHECK(as[3].max_prob == 0.5);
  CHECK(as[4].best_class == 1);
  CHECK(as[4].max_prob == 0.7);
}

TEST_CASE("model files round-trip exactly") {
  AggregateModel m = AggregateModel::Random(7, 3, 5);
  const std::string text = testing::ToText(m);
  CHECK(text.rfind("AGG-MODEL v1 V=7 C=3\n", 0) == 0);
  CHECK(testing::FromText<AggregateModel>(text) == m);
  CHECK_THROWS_AS(testing::FromText<AggregateModel>("AGG-MODEL v1 V=7 C=3\n0.5\n"), IoError);
}

}  // namespace
}  // namespace mixlm
