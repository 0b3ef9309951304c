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

#include "mixlm/corpus.h"

#include <istream>

#include "mixlm/error.h"
#include "mixlm/random.h"
#include "text_io.h"

namespace mixlm {

TokenSentence Tokenize(std::string_view line, const Vocabulary& vocab) {
  TokenSentence out;
  for (auto tok : internal::SplitWhitespace(line)) out.push_back(vocab.Lookup(tok));
  return out;
}

std::vector<std::string> ReadLines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!internal::SplitWhitespace(line).empty()) lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("error reading text");
  return lines;
}

std::vector<std::string> ReadLinesFromFile(const std::string& path) {
  auto in = internal::OpenInput(path);
  return ReadLines(in);
}

std::vector<TokenSentence> TokenizeAll(const std::vector<std::string>& lines,
                                       const Vocabulary& vocab) {
  std::vector<TokenSentence> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(Tokenize(line, vocab));
  return out;
}

HeldOutSplit SplitHeldOut(const std::vector<std::string>& lines, double fraction,
                          std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw ParameterError("held-out fraction must be in [0, 1)");
  }
  HeldOutSplit split;
  Rng rng(seed);
  for (const auto& line : lines) {
    (rng.Uniform() < fraction ? split.held_out : split.train).push_back(line);
  }
  return split;
}

Count CountEvents(const std::vector<TokenSentence>& corpus) {
  Count n = 0;
  for (const auto& s : corpus) n += s.size() + 1;
  return n;
}

}  // namespace mixlm
