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

#ifndef MIXLM_CORPUS_H_
#define MIXLM_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mixlm/types.h"
#include "mixlm/vocabulary.h"

namespace mixlm {

// Splits on ASCII whitespace. Out-of-vocabulary forms, and literal
// occurrences of the reserved marker strings, map to the unknown id.
TokenSentence Tokenize(std::string_view line, const Vocabulary& vocab);

// Non-blank lines of a text stream; whitespace-only lines are not sentences.
std::vector<std::string> ReadLines(std::istream& in);
std::vector<std::string> ReadLinesFromFile(const std::string& path);

std::vector<TokenSentence> TokenizeAll(const std::vector<std::string>& lines,
                                       const Vocabulary& vocab);

// Held-out split of a line list. Each line goes to the held-out side with
// probability `fraction`, drawn from a generator seeded with `seed`.
struct HeldOutSplit {
  std::vector<std::string> train;
  std::vector<std::string> held_out;
};
HeldOutSplit SplitHeldOut(const std::vector<std::string>& lines, double fraction,
                          std::uint64_t seed);

// Number of prediction events (interior words plus the end marker).
Count CountEvents(const std::vector<TokenSentence>& corpus);

}  // namespace mixlm

#endif  // MIXLM_CORPUS_H_
