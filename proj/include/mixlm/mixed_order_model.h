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
//
// Mixed-order Markov models: the next word is predicted from one of the m
// previous words, chosen by a chain of context-dependent coin tosses,
//
//   P(w_t | w_{t-1} .. w_{t-m}) =
//       sum_k lambda_k(w_{t-k}) M_k(w_{t-k}, w_t) prod_{j<k} [1 - lambda_j(w_{t-j})],
//
// with lambda_m fixed to 1. M_k is the skip-k transition matrix.

#ifndef MIXLM_MIXED_ORDER_MODEL_H_
#define MIXLM_MIXED_ORDER_MODEL_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixlm/conditional_model.h"
#include "mixlm/ngram_counts.h"
#include "mixlm/sparse_rows.h"
#include "mixlm/training_trace.h"
#include "mixlm/types.h"

namespace mixlm {

inline constexpr int kMaxMixedOrder = 8;

// Distinct (w_{t-m} .. w_{t-1}, w_t) prediction events with multiplicities,
// sorted lexicographically. Histories are left-padded with start markers.
class EventTable {
 public:
  EventTable(const std::vector<TokenSentence>& corpus, int order);

  int order() const { return order_; }
  std::size_t size() const { return counts_.size(); }
  // order() + 1 ids: the context oldest first, then the predicted word.
  std::span<const WordId> Event(std::size_t i) const {
    return {ids_.data() + i * (order_ + 1), static_cast<std::size_t>(order_ + 1)};
  }
  Count Multiplicity(std::size_t i) const { return counts_[i]; }
  Count total() const { return total_; }

 private:
  int order_;
  std::vector<WordId> ids_;
  std::vector<Count> counts_;
  Count total_ = 0;
};

class MixedOrderModel : public ConditionalModel {
 public:
  // lambdas: V x m, row-major, lambda_k(w) at [w * m + (k - 1)].
  MixedOrderModel(int order, std::vector<double> lambdas, std::vector<SparseRows> skips);

  int context_length() const override { return order_; }
  WordId vocab_size() const override { return vocab_size_; }
  int order() const { return order_; }

  // Throws ParameterError when the context does not hold exactly m ids.
  double Prob(std::span<const WordId> context, WordId next) const override;

  double Lambda(WordId w, int k) const { return lambdas_[Index(w, k)]; }
  std::span<const double> LambdaRow(WordId w) const {
    return {lambdas_.data() + static_cast<std::size_t>(w) * order_,
            static_cast<std::size_t>(order_)};
  }
  const std::vector<double>& lambdas() const { return lambdas_; }
  // M_k for k in 1..m.
  const SparseRows& Skip(int k) const { return skips_[k - 1]; }

  // Mixture weight of each component for a context of m ids (oldest first):
  // lambda_k(w_{t-k}) prod_{j<k} [1 - lambda_j(w_{t-j})], k = 1..m.
  std::vector<double> ComponentWeights(std::span<const WordId> context) const;

  // "MIX-MODEL v1 V=<V> m=<m>", V lines of lambdas, then sorted
  // "k w w' prob" lines.
  void Write(std::ostream& out) const;
  static MixedOrderModel Read(std::istream& in);

  friend bool operator==(const MixedOrderModel&, const MixedOrderModel&) = default;

 private:
  std::size_t Index(WordId w, int k) const {
    return static_cast<std::size_t>(w) * order_ + (k - 1);
  }

  int order_;
  WordId vocab_size_;
  std::vector<double> lambdas_;
  std::vector<SparseRows> skips_;
};

// M_k from ML-normalized skip-k counts; lambda_k(w) = 1/(m-k+1).
// Throws ParameterError when a skip table in 1..m is missing or m is out of
// range [1, 8].
MixedOrderModel InitMixed(const NgramCounts& counts, int order);

// Posterior probability that component k generated `next`, k = 1..m; all
// zeros when the model gives the event probability 0.
std::vector<double> ComponentPosterior(const MixedOrderModel& model,
                                       std::span<const WordId> context, WordId next);

struct MixedStep {
  MixedOrderModel model;
  double log_likelihood;  // of the input model, over scored events
  Count scored_events;
  Count skipped_events;   // events the input model gives probability 0
};

// One EM iteration. Zero-probability events are skipped and counted; throws
// NumericError("model assigns zero mass everywhere") when nothing scores.
MixedStep EmStepMixed(const MixedOrderModel& model, const EventTable& events,
                      int workers = 1);
MixedStep EmStepMixed(const MixedOrderModel& model, const std::vector<TokenSentence>& corpus,
                      int workers = 1);

// Log-likelihood of the model over events it scores, and how many it scores.
std::pair<double, Count> MixedLogLikelihood(const MixedOrderModel& model,
                                            const EventTable& events);

struct MixedTrainOptions {
  int order = 2;
  int iterations = 4;
  int workers = 1;
};

// InitMixed from the corpus' own skip counts, then EM.
std::pair<MixedOrderModel, TrainingTrace> TrainMixed(const std::vector<TokenSentence>& corpus,
                                                     WordId vocab_size,
                                                     const MixedTrainOptions& options);

// Fraction of prediction events to which the model assigns exactly zero.
double MissingFraction(const MixedOrderModel& model, const std::vector<TokenSentence>& corpus);

struct LambdaReport {
  std::vector<WordId> low;   // ascending lambda_1, ties by ascending id
  std::vector<WordId> high;  // descending lambda_1, ties by ascending id
};

// Among the top_n most frequent words (by unigram count, ties by ascending
// id), the list_size words with the lowest and highest lambda_1. Throws
// ParameterError for m = 1.
LambdaReport ReportLambdas(const MixedOrderModel& model, const std::vector<Count>& unigrams,
                           std::size_t top_n, std::size_t list_size);

}  // namespace mixlm

#endif  // MIXLM_MIXED_ORDER_MODEL_H_
