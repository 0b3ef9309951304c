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

// EM for per-row smoothing weights. Each validation event is a mixture of m
// components; component k carries weight mu_k, keeps 1 - sigma_k(w_k) of it
// for its own prediction M_k and hands sigma_k(w_k) to a lower model L:
//
//   P = sum_k mu_k [(1 - sigma_k(w_k)) M_k + sigma_k(w_k) L].

#ifndef MIXLM_SRC_SIGMA_FIT_H_
#define MIXLM_SRC_SIGMA_FIT_H_

#include <vector>

#include "mixlm/interpolation.h"
#include "mixlm/types.h"

namespace mixlm::internal {

struct SigmaProblem {
  WordId vocab_size = 0;
  int components = 0;
  // Per distinct event.
  std::vector<Count> multiplicity;
  std::vector<double> lower;
  // Per event and component, row-major (event, k).
  std::vector<double> weight;
  std::vector<double> direct;
  std::vector<WordId> row;

  std::size_t size() const { return multiplicity.size(); }
};

// Fits sigma_k(w) from 0.5. The per-k fallback is the same fit with every row
// tied. With one component the result is replaced by sigma = 1 when that
// scores strictly better, since EM only approaches a boundary optimum
// asymptotically.
SmoothingParams FitSigmas(const SigmaProblem& problem, const SmoothingFitOptions& options);

}  // namespace mixlm::internal

#endif  // MIXLM_SRC_SIGMA_FIT_H_
