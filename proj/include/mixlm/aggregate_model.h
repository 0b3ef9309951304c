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
// Aggregate Markov models: class-based bigrams with soft word-to-class
// membership,
//
//   P(w2|w1) = sum_c P(w2|c) P(c|w1),
//
// trained by EM on sparse bigram counts.

#ifndef MIXLM_AGGREGATE_MODEL_H_
#define MIXLM_AGGREGATE_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixlm/conditional_model.h"
#include "mixlm/ngram_counts.h"
#include "mixlm/training_trace.h"
#include "mixlm/types.h"

namespace mixlm {

class AggregateModel : public ConditionalModel {
 public:
  // All-zero factors; callers fill them through the mutable row accessors.
  AggregateModel(WordId vocab_size, int num_classes);

  // Every row drawn entrywise from uniform(0.5, 1.5) and normalized.
  // Throws ParameterError unless 1 <= num_classes <= vocab_size.
  static AggregateModel Random(WordId vocab_size, int num_classes, std::uint64_t seed);

  // C = V with P(c|w) = 1 iff c = w; P(w2|c) random as above. EM from here
  // reproduces the ML bigram.
  static AggregateModel Identity(WordId vocab_size, std::uint64_t seed);

  int context_length() const override { return 1; }
  WordId vocab_size() const override { return vocab_size_; }
  int num_classes() const { return num_classes_; }

  double Prob(std::span<const WordId> context, WordId next) const override;
  // Throws ParameterError for ids out of range.
  double Prob(WordId prev, WordId next) const;

  // P(c|w), C entries.
  std::span<const double> ClassRow(WordId w) const {
    return {class_given_word_.data() + static_cast<std::size_t>(w) * num_classes_,
            static_cast<std::size_t>(num_classes_)};
  }
  std::span<double> MutableClassRow(WordId w) {
    return {class_given_word_.data() + static_cast<std::size_t>(w) * num_classes_,
            static_cast<std::size_t>(num_classes_)};
  }
  // P(w|c), V entries.
  std::span<const double> WordRow(int c) const {
    return {word_given_class_.data() + static_cast<std::size_t>(c) * vocab_size_,
            static_cast<std::size_t>(vocab_size_)};
  }
  std::span<double> MutableWordRow(int c) {
    return {word_given_class_.data() + static_cast<std::size_t>(c) * vocab_size_,
            static_cast<std::size_t>(vocab_size_)};
  }

  // "AGG-MODEL v1 V=<V> C=<C>", then V rows of P(c|w) and C rows of P(w|c).
  void Write(std::ostream& out) const;
  static AggregateModel Read(std::istream& in);

  friend bool operator==(const AggregateModel&, const AggregateModel&) = default;

 private:
  WordId vocab_size_;
  int num_classes_;
  std::vector<double> class_given_word_;  // V x C
  std::vector<double> word_given_class_;  // C x V
};

// P(c | w1, w2) for every class; all zeros when P(w2|w1) = 0.
std::vector<double> ClassPosterior(const AggregateModel& model, WordId w1, WordId w2);

struct AggregateStep {
  AggregateModel model;
  double log_likelihood;  // of the input model
};

// Sum over stored bigrams of N(w1,w2) ln P(w2|w1).
double AggregateLogLikelihood(const AggregateModel& model, const NgramCounts& counts);

// One EM iteration. Throws DataError("no bigram events") on an empty bigram
// table. Words that never condition a bigram keep their previous P(c|w) row;
// classes that receive no posterior mass keep their previous P(w|c) row.
AggregateStep EmStepAggregate(const AggregateModel& model, const NgramCounts& counts,
                              int workers = 1);

struct AggregateTrainOptions {
  int num_classes = 1;
  int iterations = 32;
  std::uint64_t seed = 1;
  // Independent random initializations; the one with the best final
  // likelihood wins (seeds seed, seed+1, ...).
  int restarts = 1;
  int workers = 1;
};

std::pair<AggregateModel, TrainingTrace> TrainAggregate(const NgramCounts& counts,
                                                        const AggregateTrainOptions& options);

// EM from a caller-supplied starting point.
std::pair<AggregateModel, TrainingTrace> TrainAggregateFrom(AggregateModel model,
                                                            const NgramCounts& counts,
                                                            int iterations, int workers = 1);

struct ClassAssignment {
  WordId word;
  int best_class;   // argmax_c P(c|w); lowest index wins ties
  double max_prob;  // max_c P(c|w)
};

std::vector<ClassAssignment> ClassAssignments(const AggregateModel& model);

}  // namespace mixlm

#endif  // MIXLM_AGGREGATE_MODEL_H_
