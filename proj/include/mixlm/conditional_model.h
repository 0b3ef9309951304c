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
// Interface shared by every model that predicts the next word from a fixed
// number of preceding words, plus the simple models that implement it.

#ifndef MIXLM_CONDITIONAL_MODEL_H_
#define MIXLM_CONDITIONAL_MODEL_H_

#include <span>
#include <vector>

#include "mixlm/ngram_counts.h"
#include "mixlm/sparse_rows.h"
#include "mixlm/types.h"

namespace mixlm {

class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  // Number of preceding words consulted.
  virtual int context_length() const = 0;
  virtual WordId vocab_size() const = 0;

  // P(next | context). `context` holds exactly context_length() ids, oldest
  // first. Histories shorter than that are left-padded with kStartId.
  virtual double Prob(std::span<const WordId> context, WordId next) const = 0;

  // Stateless; lets derived models default their own equality.
  bool operator==(const ConditionalModel&) const = default;
};

// Throws ParameterError unless id is in [0, vocab_size).
void CheckWordId(WordId id, WordId vocab_size);
// Throws ParameterError unless context holds exactly `length` valid ids.
void CheckContext(std::span<const WordId> context, int length, WordId vocab_size);

// The last n ids of a history.
inline std::span<const WordId> Tail(std::span<const WordId> history, int n) {
  return history.subspan(history.size() - static_cast<std::size_t>(n));
}

// P = 1/V everywhere.
class UniformModel : public ConditionalModel {
 public:
  explicit UniformModel(WordId vocab_size) : vocab_size_(vocab_size) {}
  int context_length() const override { return 0; }
  WordId vocab_size() const override { return vocab_size_; }
  double Prob(std::span<const WordId> context, WordId next) const override;

 private:
  WordId vocab_size_;
};

// ML unigram over predicted tokens.
class UnigramModel : public ConditionalModel {
 public:
  explicit UnigramModel(const NgramCounts& counts);
  int context_length() const override { return 0; }
  WordId vocab_size() const override { return static_cast<WordId>(probs_.size()); }
  double Prob(std::span<const WordId> context, WordId next) const override;
  double Prob(WordId next) const { return probs_[next]; }

 private:
  std::vector<double> probs_;
};

// ML bigram P(w2|w1) = N(w1,w2) / N(w1,.); zero on absent rows.
class MlBigramModel : public ConditionalModel {
 public:
  explicit MlBigramModel(const NgramCounts& counts);
  explicit MlBigramModel(SparseRows rows) : rows_(std::move(rows)) {}
  int context_length() const override { return 1; }
  WordId vocab_size() const override { return rows_.vocab_size(); }
  double Prob(std::span<const WordId> context, WordId next) const override;
  double Prob(WordId prev, WordId next) const { return rows_.Get(prev, next); }
  bool HasRow(WordId prev) const { return rows_.HasRow(prev); }
  const SparseRows& rows() const { return rows_; }

 private:
  SparseRows rows_;
};

}  // namespace mixlm

#endif  // MIXLM_CONDITIONAL_MODEL_H_
