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

#ifndef MIXLM_TYPES_H_
#define MIXLM_TYPES_H_

#include <cstdint>
#include <vector>

namespace mixlm {

using WordId = std::int32_t;
using Count = std::uint64_t;

// Reserved ids. Every vocabulary places these tokens on lines 0-2.
inline constexpr WordId kStartId = 0;
inline constexpr WordId kEndId = 1;
inline constexpr WordId kUnknownId = 2;
inline constexpr WordId kNumReserved = 3;

// Interior word ids of one sentence; the start and end markers are implicit.
using TokenSentence = std::vector<WordId>;

}  // namespace mixlm

#endif  // MIXLM_TYPES_H_
