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

#include "mixlm/training_trace.h"

#include <cmath>
#include <ostream>

#include "text_io.h"

namespace mixlm {

void TrainingTrace::Append(int iteration, double log_likelihood, Count events) {
  rows.push_back({iteration, log_likelihood,
                  std::exp(-log_likelihood / static_cast<double>(events))});
}

void TrainingTrace::WriteCsv(std::ostream& out) const {
  out << "iteration,loglik,train_perplexity\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << internal::FormatDouble(r.log_likelihood) << ','
        << internal::FormatDouble(r.perplexity) << '\n';
  }
}

}  // namespace mixlm
