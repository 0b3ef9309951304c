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
#include <map>

#include "doctest.h"
#include "mixlm/error.h"
#include "mixlm/mixed_order_model.h"
#include "mixlm/ngram_counts.h"
#include "test_util.h"

namespace mixlm {
namespace {

std::vector<int> Skips(int m) {
  std::vector<int> s;
  for (int k = 1; k <= m; ++k) s.push_back(k);
  return s;
}

MixedOrderModel InitFrom(const std::vector<TokenSentence>& corpus, WordId V, int m) {
  return InitMixed(CountNgrams(corpus, V, 1, Skips(m)), m);
}

// Joint probability of component k and `next`, by enumerating every outcome
// of the m coin tosses: the first toss that comes up "stop" picks the
// component. The last coin always stops.
std::vector<double> CoinJoint(const MixedOrderModel& model, const std::vector<WordId>& context,
                              WordId next) {
  const int m = model.order();
  std::vector<double> joint(m, 0.0);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    double p = 1.0;
    for (int j = 1; j <= m; ++j) {
      const double lam = j == m ? 1.0 : model.Lambda(context[m - j], j);
      p *= (mask >> (j - 1)) & 1 ? lam : 1.0 - lam;
    }
    int first = 0;
    for (int j = 1; j <= m && !first; ++j) {
      if ((mask >> (j - 1)) & 1) first = j;
    }
    if (first == 0) continue;
    joint[first - 1] += p * model.Skip(first).Get(context[m - first], next);
  }
  return joint;
}

struct DenseMixed {
  std::vector<double> lambdas;                  // V x m
  std::vector<std::vector<double>> skips;       // per k, V x V dense
  double log_likelihood = 0.0;
};

DenseMixed OracleStep(const MixedOrderModel& model, const std::vector<TokenSentence>& corpus) {
  const int m = model.order();
  const WordId V = model.vocab_size();
  std::vector<double> lam_num(V * m, 0.0), lam_den(V * m, 0.0);
  std::vector<std::vector<double>> m_num(m, std::vector<double>(V * V, 0.0));
  DenseMixed out;
  for (const auto& e : testing::Events(corpus, m)) {
    auto joint = CoinJoint(model, e.history, e.next);
    double total = 0.0;
    for (double x : joint) total += x;
    if (total <= 0.0) continue;
    out.log_likelihood += std::log(total);
    for (int k = 1; k <= m; ++k) {
      const WordId w = e.history[m - k];
      double tail = 0.0;
      for (int j = k; j <= m; ++j) tail += joint[j - 1] / total;
      lam_num[w * m + k - 1] += joint[k - 1] / total;
      lam_den[w * m + k - 1] += tail;
      m_num[k - 1][w * V + e.next] += joint[k - 1] / total;
    }
  }
  out.lambdas = model.lambdas();
  for (std::size_t i = 0; i < out.lambdas.size(); ++i) {
    if (lam_den[i] > 0) out.lambdas[i] = lam_num[i] / lam_den[i];
  }
  for (WordId w = 0; w < V; ++w) out.lambdas[w * m + m - 1] = 1.0;
  out.skips.resize(m);
  for (int k = 1; k <= m; ++k) {
    out.skips[k - 1].assign(V * V, 0.0);
    for (WordId w = 0; w < V; ++w) {
      double row = 0.0;
      for (WordId x = 0; x < V; ++x) row += m_num[k - 1][w * V + x];
      for (WordId x = 0; x < V; ++x) {
        out.skips[k - 1][w * V + x] =
            row > 0 ? m_num[k - 1][w * V + x] / row : model.Skip(k).Get(w, x);
      }
    }
  }
  return out;
}

TEST_CASE("initial lambdas and skip rows") {
  const WordId a = 3, b = 4, c = 5;
  MixedOrderModel m3 = InitFrom({{a, b}, {a, c}}, 6, 3);
  for (WordId w = 0; w < 6; ++w) {
    CHECK(m3.Lambda(w, 1) == doctest::Approx(1.0 / 3));
    CHECK(m3.Lambda(w, 2) == doctest::Approx(0.5));
    CHECK(m3.Lambda(w, 3) == 1.0);
  }
  MixedOrderModel m2 = InitFrom({{a, b}, {a, c}}, 6, 2);
  CHECK(m2.Skip(1).Get(a, b) == 0.5);
  CHECK(m2.Skip(1).Get(a, c) == 0.5);
  CHECK_THROWS_AS(InitMixed(CountNgrams({{a}}, 6, 1, {1}), 2), ParameterError);
  CHECK_THROWS_AS(InitMixed(CountNgrams({{a}}, 6, 1, {1}), 0), ParameterError);
  CHECK_THROWS_AS(InitMixed(CountNgrams({{a}}, 6, 1, Skips(9)), 9), ParameterError);
}

TEST_CASE("order one is the ML bigram") {
  Rng rng(1);
  auto corpus = testing::RandomCorpus(rng, 8, 10, 6);
  NgramCounts counts = CountNgrams(corpus, 8, 2, {1});
  MixedOrderModel m = InitMixed(counts, 1);
  MlBigramModel ml(counts);
  for (WordId w1 = 0; w1 < 8; ++w1) {
    for (WordId w2 = 0; w2 < 8; ++w2) {
      const WordId ctx[] = {w1};
      CHECK(m.Prob(ctx, w2) == ml.Prob(w1, w2));
    }
  }
  MixedStep step = EmStepMixed(m, corpus);
  CHECK(step.model == m);
}

TEST_CASE("mixture probability by hand") {
  const WordId a = 3, b = 4, x = 5;
  std::vector<double> lambdas(6 * 2, 1.0);
  lambdas[a * 2] = 0.25;
  std::vector<SparseRows::Entry> m1 = {{a, b, 0.4}, {a, x, 0.6}};
  std::vector<SparseRows::Entry> m2 = {{x, a, 0.2}, {x, b, 0.8}};
  MixedOrderModel m(2, lambdas,
                    {SparseRows::FromSortedEntries(6, m1), SparseRows::FromSortedEntries(6, m2)});
  const WordId ctx[] = {x, a};
  CHECK(m.Prob(ctx, b) == doctest::Approx(0.7).epsilon(1e-15));
  // lambda_1 = 1 ignores the older word.
  const WordId ctx2[] = {b, x};
  CHECK(m.Prob(ctx2, b) == 0.0);
  const WordId short_ctx[] = {a};
  CHECK_THROWS_AS(m.Prob(short_ctx, b), ParameterError);
  const WordId long_ctx[] = {a, a, a};
  CHECK_THROWS_AS(m.Prob(long_ctx, b), ParameterError);
}

TEST_CASE("lambda_1 = 1 ignores older words") {
  Rng rng(2);
  auto corpus = testing::RandomCorpus(rng, 7, 12, 6);
  MixedOrderModel init = InitFrom(corpus, 7, 2);
  std::vector<double> lambdas(7 * 2, 1.0);
  std::vector<SparseRows> skips = {init.Skip(1), init.Skip(2)};
  MixedOrderModel m(2, lambdas, skips);
  for (const auto& ctx : testing::AllContexts(7, 2)) {
    for (WordId w = 0; w < 7; ++w) CHECK(m.Prob(ctx, w) == init.Skip(1).Get(ctx[1], w));
  }
}

TEST_CASE("component weights are convex") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.Below(kMaxMixedOrder));
    std::vector<double> lambdas(3 * m);
    for (auto& l : lambdas) l = rng.Uniform();
    std::vector<SparseRows> skips;
    for (int k = 0; k < m; ++k) skips.push_back(SparseRows::FromSortedEntries(3, {}));
    MixedOrderModel model(m, lambdas, skips);
    std::vector<WordId> ctx(m);
    for (auto& w : ctx) w = static_cast<WordId>(rng.Below(3));
    double total = 0.0;
    for (double x : model.ComponentWeights(ctx)) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("distributions sum to one over contexts with full rows") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const WordId V = 4 + static_cast<WordId>(rng.Below(5));
    const int m = 1 + static_cast<int>(rng.Below(3));
    auto corpus = testing::RandomCorpus(rng, V, 8, 6);
    MixedOrderModel model = EmStepMixed(InitFrom(corpus, V, m), corpus).model;
    for (const auto& ctx : testing::AllContexts(V, m)) {
      bool full = true;
      for (int k = 1; k <= m; ++k) full = full && model.Skip(k).HasRow(ctx[m - k]);
      if (full) CHECK(std::abs(testing::SumOverVocab(model, ctx) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("posteriors and updates match coin-toss enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const WordId V = 4 + static_cast<WordId>(rng.Below(2));  // V <= 5
    const int m = 1 + static_cast<int>(rng.Below(4));         // m <= 4
    auto corpus = testing::RandomCorpus(rng, V, 1 + rng.Below(3), 6);
    MixedOrderModel model = InitFrom(corpus, V, m);
    // Perturb lambdas so the check does not rest on the symmetric start.
    std::vector<double> lambdas = model.lambdas();
    for (auto& l : lambdas) l = rng.Uniform(0.05, 0.95);
    std::vector<SparseRows> skips;
    for (int k = 1; k <= m; ++k) skips.push_back(model.Skip(k));
    model = MixedOrderModel(m, lambdas, skips);

    for (const auto& e : testing::Events(corpus, m)) {
      auto joint = CoinJoint(model, e.history, e.next);
      double total = 0.0;
      for (double x : joint) total += x;
      CHECK(std::abs(model.Prob(e.history, e.next) - total) < 1e-12);
      auto post = ComponentPosterior(model, e.history, e.next);
      double sum = 0.0;
      for (int k = 0; k < m; ++k) {
        CHECK(std::abs(post[k] - joint[k] / total) < 1e-10);
        sum += post[k];
      }
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }

    DenseMixed oracle = OracleStep(model, corpus);
    MixedStep step = EmStepMixed(model, corpus);
    CHECK(std::abs(step.log_likelihood - oracle.log_likelihood) < 1e-10);
    for (WordId w = 0; w < V; ++w) {
      for (int k = 1; k <= m; ++k) {
        CHECK(std::abs(step.model.Lambda(w, k) - oracle.lambdas[w * m + k - 1]) < 1e-10);
        for (WordId x = 0; x < V; ++x) {
          CHECK(std::abs(step.model.Skip(k).Get(w, x) - oracle.skips[k - 1][w * V + x]) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("EM never lowers the likelihood and preserves zeros") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const WordId V = 4 + static_cast<WordId>(rng.Below(17));  // V <= 20
    const int m = 1 + static_cast<int>(rng.Below(4));
    auto corpus = testing::RandomCorpus(rng, V, 1 + rng.Below(12), 8);
    MixedOrderModel model = InitFrom(corpus, V, m);
    std::vector<std::size_t> nnz;
    for (int k = 1; k <= m; ++k) nnz.push_back(model.Skip(k).nnz());
    double previous = -INFINITY;
    EventTable events(corpus, m);
    for (int it = 0; it < 4; ++it) {
      MixedStep step = EmStepMixed(model, events);
      CHECK(step.log_likelihood >= previous - 1e-9);
      CHECK(step.skipped_events == 0);
      previous = step.log_likelihood;
      model = std::move(step.model);
      for (int k = 1; k <= m; ++k) {
        CHECK(model.Skip(k).nnz() == nnz[k - 1]);
        for (WordId w = 0; w < V; ++w) {
          if (!model.Skip(k).HasRow(w)) continue;
          double row = 0.0;
          for (double x : model.Skip(k).RowValues(w)) row += x;
          CHECK(std::abs(row - 1.0) < 1e-9);
        }
      }
      for (WordId w = 0; w < V; ++w) CHECK(model.Lambda(w, m) == 1.0);
    }
    CHECK(MixedLogLikelihood(model, events).first >= previous - 1e-9);
  }
}

TEST_CASE("zero-probability events are skipped and counted") {
  const WordId a = 3, b = 4, c = 5;
  MixedOrderModel model = InitFrom({{a, b}}, 6, 2);
  MixedStep step = EmStepMixed(model, std::vector<TokenSentence>{{a, b}, {b, a}});
  CHECK(step.skipped_events > 0);
  CHECK(step.scored_events + step.skipped_events == 6);
  CHECK_THROWS_WITH_AS(EmStepMixed(model, std::vector<TokenSentence>{{c, c}}),
                       "model assigns zero mass everywhere", NumericError);
}

TEST_CASE("event table merges duplicates") {
  const WordId a = 3, b = 4;
  EventTable t({{a, b}, {a, b}, {b}}, 2);
  CHECK(t.total() == 8);
  Count sum = 0;
  for (std::size_t i = 0; i < t.size(); ++i) sum += t.Multiplicity(i);
  CHECK(sum == 8);
  for (std::size_t i = 1; i < t.size(); ++i) {
    auto p = t.Event(i - 1), q = t.Event(i);
    CHECK(std::lexicographical_compare(p.begin(), p.end(), q.begin(), q.end()));
  }
}

TEST_CASE("training is monotone, deterministic and worker-independent") {
  Rng rng(7);
  auto corpus = testing::RandomCorpus(rng, 30, 300, 12);
  auto [m1, t1] = TrainMixed(corpus, 30, {1, 4, 1});
  auto [m2, t2] = TrainMixed(corpus, 30, {2, 4, 1});
  auto [m2b, t2b] = TrainMixed(corpus, 30, {2, 4, 3});
  REQUIRE(t2.rows.size() == 4);
  for (std::size_t i = 1; i < t2.rows.size(); ++i) {
    CHECK(t2.rows[i].perplexity <= t2.rows[i - 1].perplexity * (1 + 1e-12));
  }
  CHECK(t2.rows.back().perplexity <= t1.rows.back().perplexity);
  CHECK(m2 == m2b);
  CHECK(TrainMixed(corpus, 30, {2, 4, 1}).first == m2);
}

TEST_CASE("missing fraction") {
  Rng rng(8);
  auto corpus = testing::RandomCorpus(rng, 9, 20, 6);
  MixedOrderModel model = TrainMixed(corpus, 9, {2, 2, 1}).first;
  CHECK(MissingFraction(model, corpus) == 0.0);
  const WordId a = 3, b = 4, c = 5;
  MixedOrderModel tiny = InitFrom({{a}}, 6, 2);
  // b and c never occur, so every event of this sentence is missing.
  CHECK(MissingFraction(tiny, {{b, c}}) == 1.0);
  CHECK(MissingFraction(tiny, {{a}, {b, c}}) == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("lambda report ranks by lambda_1 with id tie-break") {
  const WordId a = 3, an = 4;
  std::vector<double> lambdas(6 * 2, 0.5);
  lambdas[a * 2] = 0.1;
  lambdas[an * 2] = 0.99;
  std::vector<SparseRows> skips = {SparseRows::FromSortedEntries(6, {}),
                                   SparseRows::FromSortedEntries(6, {})};
  MixedOrderModel model(2, lambdas, skips);
  std::vector<Count> unigrams = {0, 0, 0, 10, 9, 8};
  LambdaReport r = ReportLambdas(model, unigrams, 3, 1);
  CHECK(r.low == std::vector<WordId>{a});
  CHECK(r.high == std::vector<WordId>{an});

  MixedOrderModel flat(2, std::vector<double>(12, 0.5), skips);
  LambdaReport f = ReportLambdas(flat, unigrams, 6, 3);
  CHECK(f.low == std::vector<WordId>{0, 1, 2});
  CHECK(f.high == std::vector<WordId>{0, 1, 2});
  CHECK(ReportLambdas(flat, unigrams, 0, 3).low.empty());

  MixedOrderModel one(1, std::vector<double>(6, 1.0), {skips[0]});
  CHECK_THROWS_AS(ReportLambdas(one, unigrams, 3, 1), ParameterError);
}

TEST_CASE("model files round-trip exactly") {
  Rng rng(9);
  auto corpus = testing::RandomCorpus(rng, 10, 20, 7);
  MixedOrderModel model = TrainMixed(corpus, 10, {3, 2, 1}).first;
  const std::string text = testing::ToText(model);
  CHECK(text.rfind("MIX-MODEL v1 V=10 m=3\n", 0) == 0);
  CHECK(testing::FromText<MixedOrderModel>(text) == model);
  CHECK_THROWS_AS(testing::FromText<MixedOrderModel>("MIX-MODEL v1 V=2 m=1\n1\n"), IoError);
}

}  // namespace
}  // namespace mixlm
