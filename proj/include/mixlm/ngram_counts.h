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
// Sparse n-gram and skip-k bigram count tables.

#ifndef MIXLM_NGRAM_COUNTS_H_
#define MIXLM_NGRAM_COUNTS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <unordered_map>
#include <vector>

#include "mixlm/types.h"

namespace mixlm {

// Ids are packed 21 bits apiece into a 64-bit key.
inline constexpr WordId kMaxVocabSize = WordId{1} << 21;

struct PairEntry {
  WordId first;
  WordId second;
  Count count;
  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

struct TripleEntry {
  WordId first;
  WordId second;
  WordId third;
  Count count;
  friend bool operator==(const TripleEntry&, const TripleEntry&) = default;
};

// Hash-indexed sparse counts keyed by (w1, w2). Never stores zeros.
class PairCounts {
 public:
  void Add(WordId a, WordId b, Count c = 1);
  Count Get(WordId a, WordId b) const;
  std::size_t size() const { return table_.size(); }
  bool empty() const { return table_.empty(); }

  // Entries ordered by (first, second).
  std::vector<PairEntry> Sorted() const;

  // Sum of counts per first id; result has `vocab_size` entries.
  std::vector<Count> RowTotals(WordId vocab_size) const;
  Count Total() const;

  void Merge(const PairCounts& other);

  template <class Fn>
  void ForEach(Fn&& fn) const {
    for (const auto& [key, c] : table_) fn(Unpack1(key), Unpack2(key), c);
  }

  friend bool operator==(const PairCounts&, const PairCounts&) = default;

 private:
  static std::uint64_t Pack(WordId a, WordId b) {
    return (static_cast<std::uint64_t>(a) << 21) | static_cast<std::uint64_t>(b);
  }
  static WordId Unpack1(std::uint64_t k) { return static_cast<WordId>(k >> 21); }
  static WordId Unpack2(std::uint64_t k) {
    return static_cast<WordId>(k & (kMaxVocabSize - 1));
  }

  std::unordered_map<std::uint64_t, Count> table_;
};

// Sparse counts keyed by (w1, w2, w3).
class TripleCounts {
 public:
  void Add(WordId a, WordId b, WordId c, Count n = 1);
  Count Get(WordId a, WordId b, WordId c) const;
  std::size_t size() const { return table_.size(); }
  bool empty() const { return table_.empty(); }

  // Entries ordered by (first, second, third).
  std::vector<TripleEntry> Sorted() const;
  Count Total() const;

  void Merge(const TripleCounts& other);
  // Removes every entry with count below `threshold`.
  void EraseBelow(Count threshold);

  template <class Fn>
  void ForEach(Fn&& fn) const {
    for (const auto& [key, n] : table_) {
      fn(static_cast<WordId>(key >> 42),
         static_cast<WordId>((key >> 21) & (kMaxVocabSize - 1)),
         static_cast<WordId>(key & (kMaxVocabSize - 1)), n);
    }
  }

  friend bool operator==(const TripleCounts&, const TripleCounts&) = default;

 private:
  static std::uint64_t Pack(WordId a, WordId b, WordId c) {
    return (static_cast<std::uint64_t>(a) << 42) |
           (static_cast<std::uint64_t>(b) << 21) | static_cast<std::uint64_t>(c);
  }

  std::unordered_map<std::uint64_t, Count> table_;
};

// All count tables gathered from one corpus.
//
// Events: each sentence w_1..w_n yields n+1 prediction events w_1..w_n, </s>,
// over a history left-padded with start markers, so N(w_{t-k}, w_t) is
// defined at every position. unigrams[w] counts w as a predicted token;
// bigrams/trigrams and skip tables count (history, predicted) tuples.
struct NgramCounts {
  WordId vocab_size = 0;
  int max_order = 0;
  std::vector<int> skips;  // sorted, unique

  std::vector<Count> unigrams;  // dense, vocab_size entries
  PairCounts bigrams;           // present when max_order >= 2
  TripleCounts trigrams;        // present when max_order >= 3
  std::map<int, PairCounts> skip_tables;
  Count total = 0;  // number of prediction events N

  bool HasSkip(int k) const { return skip_tables.count(k) != 0; }
  // Throws ParameterError when skip k was not counted.
  const PairCounts& Skip(int k) const;

  // Entrywise addition; shapes must agree.
  void Merge(const NgramCounts& other);

  // Header "NGRAM-COUNTS v1 order=<o> skips=<k,...>", then sorted sections.
  void Write(std::ostream& out) const;
  static NgramCounts Read(std::istream& in);

  friend bool operator==(const NgramCounts&, const NgramCounts&) = default;
};

// Counts the corpus. max_order in 1..3, every skip >= 1. Sentences are
// sharded across `workers` threads and merged; the result equals sequential
// counting exactly (0 = all cores).
NgramCounts CountNgrams(const std::vector<TokenSentence>& corpus, WordId vocab_size,
                        int max_order, std::vector<int> skips, int workers = 1);

// Copy of `counts` with trigrams occurring fewer than `threshold` times
// dropped. Other tables are untouched. threshold >= 1.
NgramCounts TruncateTrigrams(const NgramCounts& counts, Count threshold);

}  // namespace mixlm

#endif  // MIXLM_NGRAM_COUNTS_H_
