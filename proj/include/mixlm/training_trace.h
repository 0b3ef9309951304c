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

#ifndef MIXLM_TRAINING_TRACE_H_
#define MIXLM_TRAINING_TRACE_H_

#include <iosfwd>
#include <vector>

#include "mixlm/types.h"

namespace mixlm {

struct TraceRow {
  int iteration = 0;
  double log_likelihood = 0.0;  // nats
  double perplexity = 0.0;      // exp(-log_likelihood / events)
};

// Per-iteration training likelihood. Row i describes the model after i EM
// updates.
struct TrainingTrace {
  std::vector<TraceRow> rows;

  void Append(int iteration, double log_likelihood, Count events);
  // "iteration,loglik,train_perplexity" header plus one row per iteration.
  void WriteCsv(std::ostream& out) const;
};

}  // namespace mixlm

#endif  // MIXLM_TRAINING_TRACE_H_
