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

#include "sigma_fit.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixlm/error.h"

namespace mixlm::internal {
namespace {

// One parameter slot per (w, k), or per k when tied.
struct Slots {
  bool tied;
  int m;
  std::size_t Of(WordId w, int k) const {
    return tied ? static_cast<std::size_t>(k) : static_cast<std::size_t>(w) * m + k;
  }
};

// Runs EM over the slots; `observed[i]` is set for slots any scored event
// touches.
std::vector<double> RunEm(const SigmaProblem& p, const Slots& slots, std::size_t num_slots,
                          const SmoothingFitOptions& options, std::vector<char>* observed) {
  const int m = p.components;
  std::vector<double> sigma(num_slots, 0.5);
  std::vector<double> num(num_slots), den(num_slots);
  observed->assign(num_slots, 0);
  for (int it = 0; it < options.max_iterations; ++it) {
    std::fill(num.begin(), num.end(), 0.0);
    std::fill(den.begin(), den.end(), 0.0);
    for (std::size_t e = 0; e < p.size(); ++e) {
      const std::size_t base = e * m;
      double total = 0.0;
      for (int k = 0; k < m; ++k) {
        const double s = sigma[slots.Of(p.row[base + k], k)];
        total += p.weight[base + k] * ((1.0 - s) * p.direct[base + k] + s * p.lower[e]);
      }
      if (!(total > 0.0)) continue;
      const double n = static_cast<double>(p.multiplicity[e]);
      for (int k = 0; k < m; ++k) {
        const double mu = p.weight[base + k];
        if (mu <= 0.0) continue;
        const std::size_t i = slots.Of(p.row[base + k], k);
        const double backoff = mu * sigma[i] * p.lower[e] / total;
        const double kept = mu * (1.0 - sigma[i]) * p.direct[base + k] / total;
        num[i] += n * backoff;
        den[i] += n * (backoff + kept);
        (*observed)[i] = 1;
      }
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < num_slots; ++i) {
      if (den[i] <= 0.0) continue;
      const double next = std::clamp(num[i] / den[i], 0.0, 1.0);
      delta = std::max(delta, std::abs(next - sigma[i]));
      sigma[i] = next;
    }
    if (delta < options.tolerance) break;
  }
  return sigma;
}

// Single-component case: moves a slot to sigma = 1 when that scores strictly
// better than the EM value. The sigma = 0 endpoint is never taken, since it
// would give unseen successors of the row zero probability.
void PreferFullBackoff(const SigmaProblem& p, const Slots& slots, std::vector<double>* sigma) {
  const std::size_t n_slots = sigma->size();
  std::vector<double> ll_fit(n_slots), ll_one(n_slots);
  auto term = [](double n, double prob) {
    return prob > 0.0 ? n * std::log(prob) : -std::numeric_limits<double>::infinity();
  };
  for (std::size_t e = 0; e < p.size(); ++e) {
    if (p.weight[e] <= 0.0) continue;
    const std::size_t i = slots.Of(p.row[e], 0);
    const double n = static_cast<double>(p.multiplicity[e]);
    const double s = (*sigma)[i];
    const double a = p.direct[e], b = p.lower[e];
    if (a <= 0.0 && b <= 0.0) continue;
    ll_fit[i] += term(n, (1.0 - s) * a + s * b);
    ll_one[i] += term(n, b);
  }
  for (std::size_t i = 0; i < n_slots; ++i) {
    if (ll_one[i] > ll_fit[i]) (*sigma)[i] = 1.0;
  }
}

}  // namespace

SmoothingParams FitSigmas(const SigmaProblem& problem, const SmoothingFitOptions& options) {
  if (options.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (!(options.tolerance > 0.0)) throw ParameterError("tolerance must be positive");
  const int m = problem.components;
  SmoothingParams params(problem.vocab_size, m);
  std::vector<char> observed;

  const Slots tied{true, m};
  std::vector<double> fallback = RunEm(problem, tied, m, options, &observed);
  if (m == 1) PreferFullBackoff(problem, tied, &fallback);
  for (int k = 0; k < m; ++k) params.SetFallback(k + 1, fallback[k]);
  if (options.tie_rows) return params;

  const Slots untied{false, m};
  const std::size_t num_slots = static_cast<std::size_t>(problem.vocab_size) * m;
  std::vector<double> sigma = RunEm(problem, untied, num_slots, options, &observed);
  if (m == 1) PreferFullBackoff(problem, untied, &sigma);
  for (WordId w = 0; w < problem.vocab_size; ++w) {
    for (int k = 0; k < m; ++k) {
      const std::size_t i = untied.Of(w, k);
      if (observed[i]) params.Set(w, k + 1, sigma[i]);
    }
  }
  return params;
}

}  // namespace mixlm::internal
