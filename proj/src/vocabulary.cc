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

#include "mixlm/vocabulary.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <utility>

#include "mixlm/error.h"
#include "text_io.h"

namespace mixlm {
namespace {

bool IsReserved(std::string_view w) {
  return w == Vocabulary::kStartToken || w == Vocabulary::kEndToken ||
         w == Vocabulary::kUnknownToken;
}

Vocabulary BuildFromFrequencies(std::unordered_map<std::string, Count> freq,
                                std::size_t max_size) {
  if (freq.empty()) throw DataError("empty corpus");
  std::vector<std::pair<std::string, Count>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::size_t keep = std::min(ranked.size(), max_size - kNumReserved);
  std::vector<std::string> words{std::string(Vocabulary::kStartToken),
                                 std::string(Vocabulary::kEndToken),
                                 std::string(Vocabulary::kUnknownToken)};
  for (std::size_t i = 0; i < keep; ++i) words.push_back(std::move(ranked[i].first));
  return Vocabulary::FromWords(std::move(words));
}

void CountLine(std::string_view line, std::unordered_map<std::string, Count>& freq) {
  for (auto tok : internal::SplitWhitespace(line)) {
    if (!IsReserved(tok)) ++freq[std::string(tok)];
  }
}

void CheckMaxSize(std::size_t max_size) {
  if (max_size < 4) {
    throw ParameterError("vocabulary size must be at least 4, got " +
                         std::to_string(max_size));
  }
}

}  // namespace

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>{std::string(kStartToken), std::string(kEndToken),
                                          std::string(kUnknownToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  ids_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw ParameterError("duplicate vocabulary entry \"" + words_[i] + "\"");
    }
  }
}

Vocabulary Vocabulary::Build(std::istream& corpus, std::size_t max_size) {
  CheckMaxSize(max_size);
  std::unordered_map<std::string, Count> freq;
  std::string line;
  while (std::getline(corpus, line)) CountLine(line, freq);
  if (corpus.bad()) throw IoError("error reading corpus");
  return BuildFromFrequencies(std::move(freq), max_size);
}

Vocabulary Vocabulary::Build(const std::vector<std::string>& lines, std::size_t max_size) {
  CheckMaxSize(max_size);
  std::unordered_map<std::string, Count> freq;
  for (const auto& line : lines) CountLine(line, freq);
  return BuildFromFrequencies(std::move(freq), max_size);
}

Vocabulary Vocabulary::FromWords(std::vector<std::string> words) {
  if (words.size() < kNumReserved || words[kStartId] != kStartToken ||
      words[kEndId] != kEndToken || words[kUnknownId] != kUnknownToken) {
    throw ParameterError("vocabulary must start with <s>, </s>, <unk>");
  }
  if (words.size() > static_cast<std::size_t>(1) << 21) {
    throw ParameterError("vocabulary too large");
  }
  return Vocabulary(std::move(words));
}

Vocabulary Vocabulary::Read(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw IoError("blank line in vocabulary file");
    words.push_back(line);
  }
  if (in.bad()) throw IoError("error reading vocabulary");
  try {
    return FromWords(std::move(words));
  } catch (const ParameterError& e) {
    throw IoError(std::string("bad vocabulary file: ") + e.what());
  }
}

void Vocabulary::Write(std::ostream& out) const {
  for (const auto& w : words_) out << w << '\n';
}

WordId Vocabulary::Lookup(std::string_view word) const {
  if (IsReserved(word)) return kUnknownId;
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnknownId : it->second;
}

bool Vocabulary::Contains(std::string_view word) const { return ids_.find(word) != ids_.end(); }

const std::string& Vocabulary::Word(WordId id) const {
  if (id < 0 || id >= size()) throw ParameterError("word id out of range: " + std::to_string(id));
  return words_[id];
}

}  // namespace mixlm
