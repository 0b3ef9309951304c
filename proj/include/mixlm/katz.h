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
// Katz backoff with Good-Turing discounting.

#ifndef MIXLM_KATZ_H_
#define MIXLM_KATZ_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixlm/conditional_model.h"
#include "mixlm/ngram_counts.h"
#include "mixlm/types.h"

namespace mixlm {

inline constexpr int kDefaultGoodTuringThreshold = 5;

// n[r] = number of distinct n-grams seen exactly r times, r = 0..max_r.
std::vector<Count> CountOfCounts(const PairCounts& counts, Count max_r);
std::vector<Count> CountOfCounts(const TripleCounts& counts, Count max_r);

// r* = (r+1) n_{r+1} / n_r; 0 when n_r = 0.
double GoodTuringAdjustedCount(std::span<const Count> count_of_counts, Count r);

// Discount ratios d_r for r = 1..threshold; counts above the threshold are
// not discounted.
struct GoodTuringDiscounts {
  int threshold = kDefaultGoodTuringThreshold;
  std::vector<double> ratios;  // ratios[r-1] = d_r
  std::vector<std::string> warnings;

  double Ratio(Count r) const {
    return (r == 0 || r > static_cast<Count>(threshold)) ? 1.0 : ratios[r - 1];
  }

  // "GT v1 threshold=<k>", then "r d_r" lines.
  void Write(std::ostream& out) const;
  static GoodTuringDiscounts Read(std::istream& in);
};

// d_r = (r*/r - A) / (1 - A), A = (k+1) n_{k+1} / n_1. A ratio falls back
// to 1 (with a warning) when an n_r it needs is zero or it leaves (0, 1].
// count_of_counts must cover r = 0..threshold+1.
GoodTuringDiscounts ComputeGoodTuring(std::span<const Count> count_of_counts, int threshold);
// Throws DataError on an empty table.
GoodTuringDiscounts ComputeGoodTuring(const TripleCounts& counts, int threshold);
GoodTuringDiscounts ComputeGoodTuring(const PairCounts& counts, int threshold);

// Katz backoff over bigrams (context w1) or trigrams (context w1 w2):
//
//   P(w|h) = d_r r / N(h)          if N(h, w) = r > 0
//          = alpha(h) P_backoff(w|h) otherwise,
//
// where alpha(h) makes the context sum to one and contexts with no stored
// n-grams delegate entirely (alpha = 1). N(h) is the context count before
// any truncation, so truncated n-grams release their mass to the backoff.
class KatzModel : public ConditionalModel {
 public:
  struct Context {
    Count total = 0;          // N(h)
    double alpha = 1.0;       // backoff weight
    double seen_scale = 1.0;  // != 1 only when the backoff has no room left
  };

  static std::shared_ptr<KatzModel> Bigram(const NgramCounts& counts,
                                           const GoodTuringDiscounts& discounts,
                                           std::shared_ptr<const ConditionalModel> backoff);

  // Trigrams with count below `truncate_below` are dropped before the model
  // is built; discounts should come from the untruncated counts.
  static std::shared_ptr<KatzModel> Trigram(const NgramCounts& counts, Count truncate_below,
                                            const GoodTuringDiscounts& discounts,
                                            std::shared_ptr<const ConditionalModel> backoff);

  int context_length() const override { return order_ - 1; }
  WordId vocab_size() const override { return vocab_size_; }
  double Prob(std::span<const WordId> context, WordId next) const override;

  // True when (context, next) has a stored n-gram, i.e. no backoff happens.
  bool Seen(std::span<const WordId> context, WordId next) const;
  std::size_t num_ngrams() const { return ngrams_.size(); }
  const ConditionalModel& backoff() const { return *backoff_; }
  const GoodTuringDiscounts& discounts() const { return discounts_; }

 private:
  KatzModel(int order, WordId vocab_size, GoodTuringDiscounts discounts,
            std::shared_ptr<const ConditionalModel> backoff);

  std::uint64_t ContextKey(std::span<const WordId> context) const;
  static std::uint64_t Extend(std::uint64_t context_key, WordId next) {
    return (context_key << 21) | static_cast<std::uint64_t>(next);
  }
  // Fills alpha and seen_scale once every n-gram is stored.
  void ComputeBackoffWeights();

  int order_;
  WordId vocab_size_;
  GoodTuringDiscounts discounts_;
  std::shared_ptr<const ConditionalModel> backoff_;
  std::unordered_map<std::uint64_t, Count> ngrams_;
  std::unordered_map<std::uint64_t, Context> contexts_;
};

// Baseline chain: Katz trigram -> Katz bigram -> ML unigram.
std::shared_ptr<KatzModel> BuildKatzBaseline(const NgramCounts& counts, Count truncate_below,
                                             int gt_threshold);

// Katz trigram whose backoff is `backoff` (e.g. the smoothed m=2 cascade).
std::shared_ptr<KatzModel> BuildKatzWithBackoff(const NgramCounts& counts, Count truncate_below,
                                                int gt_threshold,
                                                std::shared_ptr<const ConditionalModel> backoff);

}  // namespace mixlm

#endif  // MIXLM_KATZ_H_
