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
// Exception types. Each maps onto one CLI exit code.

#ifndef MIXLM_ERROR_H_
#define MIXLM_ERROR_H_

#include <stdexcept>
#include <string>

namespace mixlm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range arguments, malformed configuration, bad ids.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input that is well-formed but unusable (empty corpus, no events).
class DataError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable files, malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

// A model that cannot score anything (all-zero likelihood).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixlm

#endif  // MIXLM_ERROR_H_
