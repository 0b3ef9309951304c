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
// Helpers for the line-oriented text formats. Internal to the library.

#ifndef MIXLM_SRC_TEXT_IO_H_
#define MIXLM_SRC_TEXT_IO_H_

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mixlm::internal {

// Shortest text that parses back to the same double.
std::string FormatDouble(double value);

std::vector<std::string_view> SplitWhitespace(std::string_view line);

// Parses "MAGIC v1 key=value ..." and checks the first two fields.
std::map<std::string, std::string> ParseHeader(const std::string& line,
                                               std::string_view magic);
const std::string& HeaderField(const std::map<std::string, std::string>& fields,
                               const std::string& key);

std::int64_t ParseInt(std::string_view text);
std::uint64_t ParseUnsigned(std::string_view text);
double ParseDouble(std::string_view text);

std::ifstream OpenInput(const std::string& path);
std::ofstream OpenOutput(const std::string& path);

}  // namespace mixlm::internal

#endif  // MIXLM_SRC_TEXT_IO_H_
