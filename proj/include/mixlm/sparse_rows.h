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

#ifndef MIXLM_SPARSE_ROWS_H_
#define MIXLM_SPARSE_ROWS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mixlm/ngram_counts.h"
#include "mixlm/types.h"

namespace mixlm {

// Row-compressed V x V matrix of conditional probabilities M(w, w'). The
// sparsity pattern is fixed at construction. A row with no stored entries
// is absent: it is never treated as uniform.
class SparseRows {
 public:
  SparseRows() = default;

  // Maximum-likelihood rows: M(w, w') = N(w, w') / sum_w'' N(w, w'').
  static SparseRows FromCounts(const PairCounts& counts, WordId vocab_size);

  WordId vocab_size() const { return vocab_size_; }
  std::size_t nnz() const { return cols_.size(); }

  bool HasRow(WordId w) const { return offsets_[w + 1] > offsets_[w]; }
  double Get(WordId w, WordId next) const;
  // Position of (w, next) in values(), or npos when not stored.
  std::size_t Find(WordId w, WordId next) const;

  std::span<const WordId> RowCols(WordId w) const {
    return {cols_.data() + offsets_[w], cols_.data() + offsets_[w + 1]};
  }
  std::span<const double> RowValues(WordId w) const {
    return {values_.data() + offsets_[w], values_.data() + offsets_[w + 1]};
  }
  std::size_t RowBegin(WordId w) const { return offsets_[w]; }
  std::size_t RowEnd(WordId w) const { return offsets_[w + 1]; }
  const std::vector<WordId>& cols() const { return cols_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // Builds from (w, w', p) triples sorted by (w, w').
  struct Entry {
    WordId row;
    WordId col;
    double value;
  };
  static SparseRows FromSortedEntries(WordId vocab_size, const std::vector<Entry>& entries);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const SparseRows&, const SparseRows&) = default;

 private:
  WordId vocab_size_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<WordId> cols_;
  std::vector<double> values_;
};

}  // namespace mixlm

#endif  // MIXLM_SPARSE_ROWS_H_
