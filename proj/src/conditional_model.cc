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

#include "mixlm/conditional_model.h"

#include <string>

#include "mixlm/error.h"

namespace mixlm {

void CheckWordId(WordId id, WordId vocab_size) {
  if (id < 0 || id >= vocab_size) {
    throw ParameterError("word id " + std::to_string(id) + " out of range [0, " +
                         std::to_string(vocab_size) + ")");
  }
}

void CheckContext(std::span<const WordId> context, int length, WordId vocab_size) {
  if (context.size() != static_cast<std::size_t>(length)) {
    throw ParameterError("context has " + std::to_string(context.size()) +
                         " words, model needs " + std::to_string(length));
  }
  for (WordId w : context) CheckWordId(w, vocab_size);
}

double UniformModel::Prob(std::span<const WordId>, WordId next) const {
  CheckWordId(next, vocab_size_);
  return 1.0 / static_cast<double>(vocab_size_);
}

UnigramModel::UnigramModel(const NgramCounts& counts) : probs_(counts.vocab_size, 0.0) {
  if (counts.total == 0) throw DataError("no unigram events");
  for (WordId w = 0; w < counts.vocab_size; ++w) {
    probs_[w] = static_cast<double>(counts.unigrams[w]) / static_cast<double>(counts.total);
  }
}

double UnigramModel::Prob(std::span<const WordId>, WordId next) const {
  CheckWordId(next, vocab_size());
  return probs_[next];
}

MlBigramModel::MlBigramModel(const NgramCounts& counts)
    : rows_(SparseRows::FromCounts(counts.bigrams, counts.vocab_size)) {
  if (counts.max_order < 2) throw ParameterError("bigram counts were not collected");
}

double MlBigramModel::Prob(std::span<const WordId> context, WordId next) const {
  CheckContext(context, 1, vocab_size());
  CheckWordId(next, vocab_size());
  return rows_.Get(context.back(), next);
}

}  // namespace mixlm
