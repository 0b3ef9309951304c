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

#ifndef MIXLM_VOCABULARY_H_
#define MIXLM_VOCABULARY_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mixlm/types.h"

namespace mixlm {

// Bidirectional word <-> id map. Ids 0, 1 and 2 are the start, end and
// unknown tokens; every other id is a surface form. Immutable once built.
class Vocabulary {
 public:
  static constexpr std::string_view kStartToken = "<s>";
  static constexpr std::string_view kEndToken = "</s>";
  static constexpr std::string_view kUnknownToken = "<unk>";

  // Only the reserved tokens.
  Vocabulary();

  // Keeps the max_size - 3 most frequent whitespace-separated forms of the
  // corpus, ties broken lexicographically. Throws ParameterError when
  // max_size < 4, DataError("empty corpus") when there are no tokens and
  // IoError when the stream fails.
  static Vocabulary Build(std::istream& corpus, std::size_t max_size);
  static Vocabulary Build(const std::vector<std::string>& lines, std::size_t max_size);

  // words[0..2] must be the reserved tokens; duplicates are rejected.
  static Vocabulary FromWords(std::vector<std::string> words);

  // One token per line, line number = id.
  static Vocabulary Read(std::istream& in);
  void Write(std::ostream& out) const;

  // Unknown id for forms outside the vocabulary.
  WordId Lookup(std::string_view word) const;
  bool Contains(std::string_view word) const;
  const std::string& Word(WordId id) const;

  WordId size() const { return static_cast<WordId>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  explicit Vocabulary(std::vector<std::string> words);

  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> ids_;
};

}  // namespace mixlm

#endif  // MIXLM_VOCABULARY_H_
