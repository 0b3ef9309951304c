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

#include "mixlm/sparse_rows.h"

#include <algorithm>

#include "mixlm/error.h"

namespace mixlm {

SparseRows SparseRows::FromCounts(const PairCounts& counts, WordId vocab_size) {
  auto sorted = counts.Sorted();
  auto totals = counts.RowTotals(vocab_size);
  std::vector<Entry> entries;
  entries.reserve(sorted.size());
  for (const auto& e : sorted) {
    entries.push_back({e.first, e.second,
                       static_cast<double>(e.count) / static_cast<double>(totals[e.first])});
  }
  return FromSortedEntries(vocab_size, entries);
}

SparseRows SparseRows::FromSortedEntries(WordId vocab_size, const std::vector<Entry>& entries) {
  SparseRows rows;
  rows.vocab_size_ = vocab_size;
  rows.offsets_.assign(static_cast<std::size_t>(vocab_size) + 1, 0);
  rows.cols_.reserve(entries.size());
  rows.values_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (e.row < 0 || e.row >= vocab_size || e.col < 0 || e.col >= vocab_size) {
      throw ParameterError("sparse entry out of range");
    }
    if (i > 0 && (entries[i - 1].row > e.row ||
                  (entries[i - 1].row == e.row && entries[i - 1].col >= e.col))) {
      throw ParameterError("sparse entries must be sorted and unique");
    }
    ++rows.offsets_[e.row + 1];
    rows.cols_.push_back(e.col);
    rows.values_.push_back(e.value);
  }
  for (WordId w = 0; w < vocab_size; ++w) rows.offsets_[w + 1] += rows.offsets_[w];
  return rows;
}

std::size_t SparseRows::Find(WordId w, WordId next) const {
  auto begin = cols_.begin() + offsets_[w];
  auto end = cols_.begin() + offsets_[w + 1];
  auto it = std::lower_bound(begin, end, next);
  if (it == end || *it != next) return npos;
  return static_cast<std::size_t>(it - cols_.begin());
}

double SparseRows::Get(WordId w, WordId next) const {
  std::size_t i = Find(w, next);
  return i == npos ? 0.0 : values_[i];
}

}  // namespace mixlm
