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

#include "mixlm/mixed_order_model.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "mixlm/error.h"
#include "mixlm/parallel.h"
#include "text_io.h"

namespace mixlm {
namespace {

// Fixed so that accumulation order, and hence every bit of the result, is
// independent of the worker count.
constexpr std::size_t kEmShards = 8;

void CheckOrder(int order) {
  if (order < 1 || order > kMaxMixedOrder) {
    throw ParameterError("mixed order must be in [1, " + std::to_string(kMaxMixedOrder) +
                         "], got " + std::to_string(order));
  }
}

// a_k = lambda_k prod_{j<k}(1 - lambda_j) M_k(w_{t-k}, w_t); idx_k is the
// position of that M_k entry, or npos.
double ComponentTerms(const MixedOrderModel& model, std::span<const WordId> context,
                      WordId next, double* terms, std::size_t* idx) {
  const int m = model.order();
  double remaining = 1.0, total = 0.0;
  for (int k = 1; k <= m; ++k) {
    const WordId wk = context[m - k];
    const double lam = k == m ? 1.0 : model.Lambda(wk, k);
    const SparseRows& skip = model.Skip(k);
    idx[k - 1] = skip.Find(wk, next);
    terms[k - 1] =
        idx[k - 1] == SparseRows::npos ? 0.0 : remaining * lam * skip.values()[idx[k - 1]];
    total += terms[k - 1];
    remaining *= 1.0 - lam;
  }
  return total;
}

void CheckEventIds(std::span<const WordId> ev, WordId vocab_size) {
  for (WordId w : ev) CheckWordId(w, vocab_size);
}

struct MixedAccumulators {
  std::vector<double> lambda_num, lambda_den;      // V x m
  std::vector<std::vector<double>> skip_num;       // per k, nnz(M_k)
  std::vector<std::vector<double>> skip_den;       // per k, V
  double log_likelihood = 0.0;
  Count scored = 0;
  Count skipped = 0;

  explicit MixedAccumulators(const MixedOrderModel& model) {
    const std::size_t vm = static_cast<std::size_t>(model.vocab_size()) * model.order();
    lambda_num.assign(vm, 0.0);
    lambda_den.assign(vm, 0.0);
    for (int k = 1; k <= model.order(); ++k) {
      skip_num.emplace_back(model.Skip(k).nnz(), 0.0);
      skip_den.emplace_back(model.vocab_size(), 0.0);
    }
  }

  void Add(const MixedAccumulators& o) {
    for (std::size_t i = 0; i < lambda_num.size(); ++i) {
      lambda_num[i] += o.lambda_num[i];
      lambda_den[i] += o.lambda_den[i];
    }
    for (std::size_t k = 0; k < skip_num.size(); ++k) {
      for (std::size_t i = 0; i < skip_num[k].size(); ++i) skip_num[k][i] += o.skip_num[k][i];
      for (std::size_t i = 0; i < skip_den[k].size(); ++i) skip_den[k][i] += o.skip_den[k][i];
    }
    log_likelihood += o.log_likelihood;
    scored += o.scored;
    skipped += o.skipped;
  }
};

}  // namespace

EventTable::EventTable(const std::vector<TokenSentence>& corpus, int order) : order_(order) {
  CheckOrder(order);
  const std::size_t width = order + 1;
  std::vector<WordId> raw;
  std::vector<WordId> padded;
  for (const auto& sentence : corpus) {
    padded.assign(order, kStartId);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(kEndId);
    for (std::size_t t = order; t < padded.size(); ++t) {
      raw.insert(raw.end(), padded.begin() + (t - order), padded.begin() + t + 1);
    }
  }
  const std::size_t n = raw.size() / width;
  total_ = n;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto at = [&](std::size_t i) { return raw.begin() + i * width; };
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(at(a), at(a) + width, at(b), at(b) + width);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!counts_.empty() &&
        std::equal(at(perm[i]), at(perm[i]) + width, ids_.end() - width)) {
      ++counts_.back();
      continue;
    }
    ids_.insert(ids_.end(), at(perm[i]), at(perm[i]) + width);
    counts_.push_back(1);
  }
}

MixedOrderModel::MixedOrderModel(int order, std::vector<double> lambdas,
                                 std::vector<SparseRows> skips)
    : order_(order), lambdas_(std::move(lambdas)), skips_(std::move(skips)) {
  CheckOrder(order);
  if (skips_.size() != static_cast<std::size_t>(order)) {
    throw ParameterError("mixed model needs one skip matrix per order");
  }
  vocab_size_ = skips_[0].vocab_size();
  for (const auto& s : skips_) {
    if (s.vocab_size() != vocab_size_) throw ParameterError("skip matrices disagree on V");
  }
  if (lambdas_.size() != static_cast<std::size_t>(vocab_size_) * order_) {
    throw ParameterError("lambda table must be V x m");
  }
  for (WordId w = 0; w < vocab_size_; ++w) {
    for (int k = 1; k < order_; ++k) {
      double lam = lambdas_[Index(w, k)];
      if (!(lam >= 0.0 && lam <= 1.0)) throw ParameterError("lambda outside [0, 1]");
    }
    lambdas_[Index(w, order_)] = 1.0;
  }
}

double MixedOrderModel::Prob(std::span<const WordId> context, WordId next) const {
  CheckContext(context, order_, vocab_size_);
  CheckWordId(next, vocab_size_);
  double terms[kMaxMixedOrder];
  std::size_t idx[kMaxMixedOrder];
  return ComponentTerms(*this, context, next, terms, idx);
}

std::vector<double> MixedOrderModel::ComponentWeights(std::span<const WordId> context) const {
  CheckContext(context, order_, vocab_size_);
  std::vector<double> weights(order_);
  double remaining = 1.0;
  for (int k = 1; k <= order_; ++k) {
    const double lam = k == order_ ? 1.0 : Lambda(context[order_ - k], k);
    weights[k - 1] = remaining * lam;
    remaining *= 1.0 - lam;
  }
  return weights;
}

void MixedOrderModel::Write(std::ostream& out) const {
  out << "MIX-MODEL v1 V=" << vocab_size_ << " m=" << order_ << '\n';
  for (WordId w = 0; w < vocab_size_; ++w) {
    auto row = LambdaRow(w);
    for (int k = 0; k < order_; ++k) out << (k ? " " : "") << internal::FormatDouble(row[k]);
    out << '\n';
  }
  for (int k = 1; k <= order_; ++k) {
    const SparseRows& skip = Skip(k);
    for (WordId w = 0; w < vocab_size_; ++w) {
      auto cols = skip.RowCols(w);
      auto vals = skip.RowValues(w);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        out << k << ' ' << w << ' ' << cols[i] << ' ' << internal::FormatDouble(vals[i]) << '\n';
      }
    }
  }
}

MixedOrderModel MixedOrderModel::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty mixed model file");
  auto header = internal::ParseHeader(line, "MIX-MODEL");
  auto V = internal::ParseInt(internal::HeaderField(header, "V"));
  auto m = internal::ParseInt(internal::HeaderField(header, "m"));
  if (V < 1 || V > kMaxVocabSize || m < 1 || m > kMaxMixedOrder) {
    throw IoError("bad model header: " + line);
  }
  std::vector<double> lambdas;
  lambdas.reserve(static_cast<std::size_t>(V) * m);
  for (WordId w = 0; w < V; ++w) {
    if (!std::getline(in, line)) throw IoError("mixed model file is truncated");
    auto fields = internal::SplitWhitespace(line);
    if (fields.size() != static_cast<std::size_t>(m)) throw IoError("lambda row has wrong length");
    for (auto f : fields) lambdas.push_back(internal::ParseDouble(f));
  }
  std::vector<std::vector<SparseRows::Entry>> entries(m);
  while (std::getline(in, line)) {
    auto f = internal::SplitWhitespace(line);
    if (f.empty()) continue;
    if (f.size() != 4) throw IoError("malformed skip entry: \"" + line + "\"");
    auto k = internal::ParseInt(f[0]);
    auto w = internal::ParseInt(f[1]);
    auto w2 = internal::ParseInt(f[2]);
    if (k < 1 || k > m || w < 0 || w >= V || w2 < 0 || w2 >= V) {
      throw IoError("skip entry out of range: \"" + line + "\"");
    }
    entries[k - 1].push_back({static_cast<WordId>(w), static_cast<WordId>(w2),
                              internal::ParseDouble(f[3])});
  }
  std::vector<SparseRows> skips;
  for (auto& e : entries) {
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    skips.push_back(SparseRows::FromSortedEntries(static_cast<WordId>(V), e));
  }
  try {
    return MixedOrderModel(static_cast<int>(m), std::move(lambdas), std::move(skips));
  } catch (const ParameterError& e) {
    throw IoError(std::string("bad mixed model file: ") + e.what());
  }
}

std::vector<double> ComponentPosterior(const MixedOrderModel& model,
                                       std::span<const WordId> context, WordId next) {
  CheckContext(context, model.order(), model.vocab_size());
  CheckWordId(next, model.vocab_size());
  double terms[kMaxMixedOrder];
  std::size_t idx[kMaxMixedOrder];
  const double total = ComponentTerms(model, context, next, terms, idx);
  std::vector<double> post(model.order(), 0.0);
  if (total <= 0.0) return post;
  for (int k = 0; k < model.order(); ++k) post[k] = terms[k] / total;
  return post;
}

MixedOrderModel InitMixed(const NgramCounts& counts, int order) {
  CheckOrder(order);
  std::vector<SparseRows> skips;
  for (int k = 1; k <= order; ++k) {
    skips.push_back(SparseRows::FromCounts(counts.Skip(k), counts.vocab_size));
  }
  std::vector<double> lambdas(static_cast<std::size_t>(counts.vocab_size) * order);
  for (WordId w = 0; w < counts.vocab_size; ++w) {
    for (int k = 1; k <= order; ++k) {
      lambdas[static_cast<std::size_t>(w) * order + (k - 1)] = 1.0 / (order - k + 1);
    }
  }
  return MixedOrderModel(order, std::move(lambdas), std::move(skips));
}

MixedStep EmStepMixed(const MixedOrderModel& model, const EventTable& events, int workers) {
  if (events.order() != model.order()) {
    throw ParameterError("event table order does not match the model");
  }
  const int m = model.order();
  const WordId V = model.vocab_size();
  auto bounds = SplitRange(events.size(), kEmShards);
  std::vector<MixedAccumulators> shards(bounds.size() - 1, MixedAccumulators(model));

  ParallelFor(shards.size(), workers, [&](std::size_t s) {
    MixedAccumulators& acc = shards[s];
    double terms[kMaxMixedOrder], tail[kMaxMixedOrder + 1];
    std::size_t idx[kMaxMixedOrder];
    for (std::size_t e = bounds[s]; e < bounds[s + 1]; ++e) {
      auto ev = events.Event(e);
      CheckEventIds(ev, V);
      auto context = ev.first(m);
      const WordId next = ev[m];
      const Count mult = events.Multiplicity(e);
      const double total = ComponentTerms(model, context, next, terms, idx);
      if (total <= 0.0) {
        acc.skipped += mult;
        continue;
      }
      const double n = static_cast<double>(mult);
      acc.log_likelihood += n * std::log(total);
      acc.scored += mult;
      tail[m] = 0.0;
      for (int k = m; k >= 1; --k) tail[k - 1] = tail[k] + terms[k - 1] / total;
      for (int k = 1; k <= m; ++k) {
        const WordId wk = context[m - k];
        const std::size_t li = static_cast<std::size_t>(wk) * m + (k - 1);
        const double phi = terms[k - 1] / total;
        acc.lambda_num[li] += n * phi;
        acc.lambda_den[li] += n * tail[k - 1];
        if (idx[k - 1] != SparseRows::npos && phi > 0.0) {
          acc.skip_num[k - 1][idx[k - 1]] += n * phi;
          acc.skip_den[k - 1][wk] += n * phi;
        }
      }
    }
  });

  MixedAccumulators acc = std::move(shards[0]);
  for (std::size_t s = 1; s < shards.size(); ++s) acc.Add(shards[s]);
  if (acc.scored == 0) throw NumericError("model assigns zero mass everywhere");

  std::vector<double> lambdas = model.lambdas();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (acc.lambda_den[i] > 0.0) lambdas[i] = acc.lambda_num[i] / acc.lambda_den[i];
  }
  std::vector<SparseRows> skips;
  for (int k = 1; k <= m; ++k) {
    SparseRows skip = model.Skip(k);
    auto& values = skip.values();
    for (WordId w = 0; w < V; ++w) {
      const double den = acc.skip_den[k - 1][w];
      if (den <= 0.0) continue;
      for (std::size_t i = skip.RowBegin(w); i < skip.RowEnd(w); ++i) {
        values[i] = acc.skip_num[k - 1][i] / den;
      }
    }
    skips.push_back(std::move(skip));
  }
  return {MixedOrderModel(m, std::move(lambdas), std::move(skips)), acc.log_likelihood,
          acc.scored, acc.skipped};
}

MixedStep EmStepMixed(const MixedOrderModel& model, const std::vector<TokenSentence>& corpus,
                      int workers) {
  if (corpus.empty()) throw DataError("empty training corpus");
  return EmStepMixed(model, EventTable(corpus, model.order()), workers);
}

std::pair<double, Count> MixedLogLikelihood(const MixedOrderModel& model,
                                            const EventTable& events) {
  double ll = 0.0;
  Count scored = 0;
  double terms[kMaxMixedOrder];
  std::size_t idx[kMaxMixedOrder];
  for (std::size_t e = 0; e < events.size(); ++e) {
    auto ev = events.Event(e);
    CheckEventIds(ev, model.vocab_size());
    double p = ComponentTerms(model, ev.first(model.order()), ev[model.order()], terms, idx);
    if (p > 0.0) {
      ll += static_cast<double>(events.Multiplicity(e)) * std::log(p);
      scored += events.Multiplicity(e);
    }
  }
  return {ll, scored};
}

std::pair<MixedOrderModel, TrainingTrace> TrainMixed(const std::vector<TokenSentence>& corpus,
                                                     WordId vocab_size,
                                                     const MixedTrainOptions& options) {
  CheckOrder(options.order);
  if (options.iterations < 0) throw ParameterError("iteration count must be >= 0");
  if (corpus.empty()) throw DataError("empty training corpus");
  std::vector<int> skips(options.order);
  std::iota(skips.begin(), skips.end(), 1);
  NgramCounts counts = CountNgrams(corpus, vocab_size, 1, skips, options.workers);
  MixedOrderModel model = InitMixed(counts, options.order);
  EventTable events(corpus, options.order);
  TrainingTrace trace;
  for (int it = 1; it <= options.iterations; ++it) {
    MixedStep step = EmStepMixed(model, events, options.workers);
    if (it > 1) trace.Append(it - 1, step.log_likelihood, step.scored_events);
    model = std::move(step.model);
  }
  if (options.iterations > 0) {
    auto [ll, scored] = MixedLogLikelihood(model, events);
    trace.Append(options.iterations, ll, scored);
  }
  return {std::move(model), std::move(trace)};
}

double MissingFraction(const MixedOrderModel& model, const std::vector<TokenSentence>& corpus) {
  const int m = model.order();
  Count events = 0, missing = 0;
  std::vector<WordId> padded;
  for (const auto& sentence : corpus) {
    padded.assign(m, kStartId);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(kEndId);
    for (std::size_t t = m; t < padded.size(); ++t) {
      ++events;
      std::span<const WordId> context(padded.data() + t - m, m);
      if (model.Prob(context, padded[t]) == 0.0) ++missing;
    }
  }
  return events == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(events);
}

LambdaReport ReportLambdas(const MixedOrderModel& model, const std::vector<Count>& unigrams,
                           std::size_t top_n, std::size_t list_size) {
  if (model.order() < 2) throw ParameterError("lambda_1 is fixed at 1 when m = 1");
  if (unigrams.size() != static_cast<std::size_t>(model.vocab_size())) {
    throw ParameterError("unigram table does not match the model vocabulary");
  }
  std::vector<WordId> words(model.vocab_size());
  std::iota(words.begin(), words.end(), 0);
  std::stable_sort(words.begin(), words.end(),
                   [&](WordId a, WordId b) { return unigrams[a] > unigrams[b]; });
  words.resize(std::min(top_n, words.size()));

  LambdaReport report;
  report.low = words;
  std::sort(report.low.begin(), report.low.end(), [&](WordId a, WordId b) {
    double la = model.Lambda(a, 1), lb = model.Lambda(b, 1);
    return la != lb ? la < lb : a < b;
  });
  report.high = words;
  std::sort(report.high.begin(), report.high.end(), [&](WordId a, WordId b) {
    double la = model.Lambda(a, 1), lb = model.Lambda(b, 1);
    return la != lb ? la > lb : a < b;
  });
  report.low.resize(std::min(list_size, report.low.size()));
  report.high.resize(std::min(list_size, report.high.size()));
  return report;
}

}  // namespace mixlm
