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

#include "mixlm/aggregate_model.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>

#include "mixlm/error.h"
#include "mixlm/parallel.h"
#include "mixlm/random.h"
#include "text_io.h"

namespace mixlm {
namespace {

void FillRandomRow(std::span<double> row, Rng& rng) {
  double sum = 0.0;
  for (double& x : row) {
    x = rng.Uniform(0.5, 1.5);
    sum += x;
  }
  for (double& x : row) x /= sum;
}

void CheckShape(WordId vocab_size, int num_classes) {
  if (vocab_size < 1 || vocab_size > kMaxVocabSize) {
    throw ParameterError("vocabulary size out of range");
  }
  if (num_classes < 1 || num_classes > vocab_size) {
    throw ParameterError("class count must be in [1, V=" + std::to_string(vocab_size) +
                         "], got " + std::to_string(num_classes));
  }
}

// Per-shard E-step accumulators for P(w|c) live in C x V dense blocks; the
// shard count depends only on the model shape so that results do not vary
// with the number of threads.
std::size_t ShardCount(WordId vocab_size, int num_classes) {
  constexpr double kBudgetBytes = 128.0 * 1024 * 1024;
  double block = 8.0 * vocab_size * num_classes;
  return static_cast<std::size_t>(std::clamp(kBudgetBytes / block, 1.0, 16.0));
}

// Shard boundaries placed between rows so each conditioning word belongs to
// exactly one shard.
std::vector<std::size_t> RowAlignedBounds(const std::vector<PairEntry>& entries,
                                          std::size_t shards) {
  std::vector<std::size_t> bounds{0};
  for (std::size_t s = 1; s < shards; ++s) {
    std::size_t b = entries.size() * s / shards;
    while (b < entries.size() && b > 0 && entries[b].first == entries[b - 1].first) ++b;
    if (b > bounds.back() && b < entries.size()) bounds.push_back(b);
  }
  bounds.push_back(entries.size());
  return bounds;
}

AggregateStep EmStepSorted(const AggregateModel& model, const std::vector<PairEntry>& entries,
                           int workers) {
  if (entries.empty()) throw DataError("no bigram events");
  const WordId V = model.vocab_size();
  const int C = model.num_classes();
  AggregateModel next = model;

  auto bounds = RowAlignedBounds(entries, ShardCount(V, C));
  std::size_t shards = bounds.size() - 1;
  std::vector<std::vector<double>> word_acc(shards);
  std::vector<double> shard_ll(shards, 0.0);
  std::vector<Count> shard_scored(shards, 0);

  ParallelFor(shards, workers, [&](std::size_t s) {
    std::vector<double>& acc = word_acc[s];
    acc.assign(static_cast<std::size_t>(C) * V, 0.0);
    std::vector<int> support;
    std::vector<double> joint(C), row_num(C);
    std::size_t i = bounds[s];
    while (i < bounds[s + 1]) {
      const WordId w1 = entries[i].first;
      auto class_row = model.ClassRow(w1);
      support.clear();
      for (int c = 0; c < C; ++c) {
        if (class_row[c] > 0.0) support.push_back(c);
      }
      std::fill(row_num.begin(), row_num.end(), 0.0);
      for (; i < bounds[s + 1] && entries[i].first == w1; ++i) {
        const WordId w2 = entries[i].second;
        const double n = static_cast<double>(entries[i].count);
        double z = 0.0;
        for (int c : support) {
          joint[c] = class_row[c] * model.WordRow(c)[w2];
          z += joint[c];
        }
        if (z <= 0.0) continue;
        shard_ll[s] += n * std::log(z);
        shard_scored[s] += entries[i].count;
        for (int c : support) {
          double r = n * joint[c] / z;
          row_num[c] += r;
          acc[static_cast<std::size_t>(c) * V + w2] += r;
        }
      }
      double total = 0.0;
      for (int c : support) total += row_num[c];
      if (total > 0.0) {
        auto out = next.MutableClassRow(w1);
        for (int c = 0; c < C; ++c) out[c] = row_num[c] / total;
      }
    }
  });

  double ll = 0.0;
  Count scored = 0;
  for (std::size_t s = 0; s < shards; ++s) {
    ll += shard_ll[s];
    scored += shard_scored[s];
  }
  if (scored == 0) throw NumericError("model assigns zero mass to every bigram");
  for (std::size_t s = 1; s < shards; ++s) {
    for (std::size_t j = 0; j < word_acc[0].size(); ++j) word_acc[0][j] += word_acc[s][j];
  }
  const std::vector<double>& acc = word_acc[0];
  ParallelFor(static_cast<std::size_t>(C), workers, [&](std::size_t c) {
    const double* row = acc.data() + c * V;
    double total = 0.0;
    for (WordId w = 0; w < V; ++w) total += row[w];
    if (total <= 0.0) return;
    auto out = next.MutableWordRow(static_cast<int>(c));
    for (WordId w = 0; w < V; ++w) out[w] = row[w] / total;
  });
  return {std::move(next), ll};
}

double LogLikelihoodSorted(const AggregateModel& model, const std::vector<PairEntry>& entries) {
  double ll = 0.0;
  for (const auto& e : entries) {
    ll += static_cast<double>(e.count) * std::log(model.Prob(e.first, e.second));
  }
  return ll;
}

Count TotalCount(const std::vector<PairEntry>& entries) {
  Count n = 0;
  for (const auto& e : entries) n += e.count;
  return n;
}

}  // namespace

AggregateModel::AggregateModel(WordId vocab_size, int num_classes)
    : vocab_size_(vocab_size), num_classes_(num_classes) {
  CheckShape(vocab_size, num_classes);
  class_given_word_.assign(static_cast<std::size_t>(vocab_size) * num_classes, 0.0);
  word_given_class_.assign(static_cast<std::size_t>(vocab_size) * num_classes, 0.0);
}

AggregateModel AggregateModel::Random(WordId vocab_size, int num_classes, std::uint64_t seed) {
  AggregateModel model(vocab_size, num_classes);
  Rng rng(seed);
  for (WordId w = 0; w < vocab_size; ++w) FillRandomRow(model.MutableClassRow(w), rng);
  for (int c = 0; c < num_classes; ++c) FillRandomRow(model.MutableWordRow(c), rng);
  return model;
}

AggregateModel AggregateModel::Identity(WordId vocab_size, std::uint64_t seed) {
  AggregateModel model(vocab_size, vocab_size);
  Rng rng(seed);
  for (WordId w = 0; w < vocab_size; ++w) model.MutableClassRow(w)[w] = 1.0;
  for (int c = 0; c < vocab_size; ++c) FillRandomRow(model.MutableWordRow(c), rng);
  return model;
}

double AggregateModel::Prob(std::span<const WordId> context, WordId next) const {
  CheckContext(context, 1, vocab_size_);
  return Prob(context.back(), next);
}

double AggregateModel::Prob(WordId prev, WordId next) const {
  CheckWordId(prev, vocab_size_);
  CheckWordId(next, vocab_size_);
  auto class_row = ClassRow(prev);
  double p = 0.0;
  for (int c = 0; c < num_classes_; ++c) {
    if (class_row[c] != 0.0) p += class_row[c] * word_given_class_[static_cast<std::size_t>(c) * vocab_size_ + next];
  }
  return p;
}

void AggregateModel::Write(std::ostream& out) const {
  out << "AGG-MODEL v1 V=" << vocab_size_ << " C=" << num_classes_ << '\n';
  auto write_row = [&](std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? " " : "") << internal::FormatDouble(row[i]);
    }
    out << '\n';
  };
  for (WordId w = 0; w < vocab_size_; ++w) write_row(ClassRow(w));
  for (int c = 0; c < num_classes_; ++c) write_row(WordRow(c));
}

AggregateModel AggregateModel::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty aggregate model file");
  auto header = internal::ParseHeader(line, "AGG-MODEL");
  auto V = internal::ParseInt(internal::HeaderField(header, "V"));
  auto C = internal::ParseInt(internal::HeaderField(header, "C"));
  if (V < 1 || V > kMaxVocabSize || C < 1 || C > V) throw IoError("bad model header: " + line);
  AggregateModel model(static_cast<WordId>(V), static_cast<int>(C));
  auto read_row = [&](std::span<double> row) {
    if (!std::getline(in, line)) throw IoError("aggregate model file is truncated");
    auto fields = internal::SplitWhitespace(line);
    if (fields.size() != row.size()) throw IoError("aggregate model row has wrong length");
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = internal::ParseDouble(fields[i]);
  };
  for (WordId w = 0; w < model.vocab_size_; ++w) read_row(model.MutableClassRow(w));
  for (int c = 0; c < model.num_classes_; ++c) read_row(model.MutableWordRow(c));
  return model;
}

double AggregateLogLikelihood(const AggregateModel& model, const NgramCounts& counts) {
  return LogLikelihoodSorted(model, counts.bigrams.Sorted());
}

AggregateStep EmStepAggregate(const AggregateModel& model, const NgramCounts& counts,
                              int workers) {
  if (counts.vocab_size != model.vocab_size()) {
    throw ParameterError("model and counts disagree on vocabulary size");
  }
  return EmStepSorted(model, counts.bigrams.Sorted(), workers);
}

std::pair<AggregateModel, TrainingTrace> TrainAggregateFrom(AggregateModel model,
                                                            const NgramCounts& counts,
                                                            int iterations, int workers) {
  if (counts.vocab_size != model.vocab_size()) {
    throw ParameterError("model and counts disagree on vocabulary size");
  }
  if (iterations < 0) throw ParameterError("iteration count must be >= 0");
  auto entries = counts.bigrams.Sorted();
  if (entries.empty()) throw DataError("no bigram events");
  const Count events = TotalCount(entries);
  TrainingTrace trace;
  for (int it = 1; it <= iterations; ++it) {
    AggregateStep step = EmStepSorted(model, entries, workers);
    if (it > 1) trace.Append(it - 1, step.log_likelihood, events);
    model = std::move(step.model);
  }
  if (iterations > 0) trace.Append(iterations, LogLikelihoodSorted(model, entries), events);
  return {std::move(model), std::move(trace)};
}

std::pair<AggregateModel, TrainingTrace> TrainAggregate(const NgramCounts& counts,
                                                        const AggregateTrainOptions& options) {
  CheckShape(counts.vocab_size, options.num_classes);
  if (options.restarts < 1) throw ParameterError("restart count must be >= 1");
  std::optional<std::pair<AggregateModel, TrainingTrace>> best;
  for (int r = 0; r < options.restarts; ++r) {
    auto result = TrainAggregateFrom(
        AggregateModel::Random(counts.vocab_size, options.num_classes, options.seed + r),
        counts, options.iterations, options.workers);
    if (!best || (!result.second.rows.empty() &&
                  result.second.rows.back().log_likelihood >
                      best->second.rows.back().log_likelihood)) {
      best = std::move(result);
    }
  }
  return std::move(*best);
}

std::vector<double> ClassPosterior(const AggregateModel& model, WordId w1, WordId w2) {
  const double total = model.Prob(w1, w2);
  std::vector<double> post(model.num_classes(), 0.0);
  if (total <= 0.0) return post;
  auto row = model.ClassRow(w1);
  for (int c = 0; c < model.num_classes(); ++c) post[c] = model.WordRow(c)[w2] * row[c] / total;
  return post;
}

std::vector<ClassAssignment> ClassAssignments(const AggregateModel& model) {
  std::vector<ClassAssignment> out;
  out.reserve(model.vocab_size());
  for (WordId w = 0; w < model.vocab_size(); ++w) {
    auto row = model.ClassRow(w);
    int best = 0;
    for (int c = 1; c < model.num_classes(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out.push_back({w, best, row[best]});
  }
  return out;
}

}  // namespace mixlm
