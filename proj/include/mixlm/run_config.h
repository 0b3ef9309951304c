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
// Flat key=value run configuration. Command-line flags override file values.

#ifndef MIXLM_RUN_CONFIG_H_
#define MIXLM_RUN_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mixlm {

struct RunConfig {
  std::string subcommand;

  // Inputs.
  std::string corpus;    // training text (prepare, train-mixed)
  std::string test;      // evaluation text
  std::string valid;     // held-out text for smoothing
  std::string vocab;
  std::string counts;
  std::string model;     // model file, or "uniform"
  std::string model_type = "auto";  // auto|uniform|aggregate|mixed|cascade|katz-baseline
  std::string aggregate;
  std::vector<std::string> mixed;  // models of order 2, 3, ... for smooth
  std::string manifest;

  // Outputs.
  std::string out_dir = ".";
  std::string output;    // model / report file
  std::string trace;     // trace CSV

  // Knobs.
  int vocab_size = 5000;
  int max_order = 3;
  std::vector<int> skips{1, 2, 3, 4};
  int classes = 32;
  int order = 2;
  int iterations = 0;  // 0: 32 for aggregate, 4 for mixed
  std::uint64_t seed = 1;
  int restarts = 1;
  bool identity_init = false;
  int truncate = 1;
  int truncate_max = 5;
  int gt_threshold = 5;
  double valid_frac = 0.1;
  bool trigram = false;
  bool tie_rows = false;
  std::string unseen = "none";  // none|bigram|trigram
  int top_n = 300;
  int list_size = 50;
  int workers = 0;  // 0: all cores

  // Throws ParameterError on unknown keys or unparsable values.
  static RunConfig FromText(std::istream& in);
  static RunConfig FromFile(const std::string& path);
  void Set(const std::string& key, const std::string& value);
  void WriteText(std::ostream& out) const;

  // Range checks shared by every subcommand. Throws ParameterError.
  void Validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace mixlm

#endif  // MIXLM_RUN_CONFIG_H_
