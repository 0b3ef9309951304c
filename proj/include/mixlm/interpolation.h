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
// Held-out interpolation of an ML bigram with a base model, and the per-row
// smoothing parameter tables shared with the mixed-order cascade.

#ifndef MIXLM_INTERPOLATION_H_
#define MIXLM_INTERPOLATION_H_

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "mixlm/conditional_model.h"
#include "mixlm/types.h"

namespace mixlm {

// sigma_k(w) in [0, 1] for k = 1..m, with a per-k fallback used for rows that
// had no validation data. Bigram interpolation uses m = 1.
class SmoothingParams {
 public:
  SmoothingParams() = default;
  SmoothingParams(WordId vocab_size, int components);

  WordId vocab_size() const { return vocab_size_; }
  int components() const { return components_; }

  // Fitted value, or the fallback when the row was never fitted.
  double Get(WordId w, int k) const;
  bool IsFitted(WordId w, int k) const;
  double Fallback(int k) const { return fallback_[k - 1]; }

  // Throws ParameterError for values outside [0, 1].
  void Set(WordId w, int k, double sigma);
  void SetFallback(int k, double sigma);

  // "SIGMA v1 V=<V> m=<m>", then "k -1 sigma" fallback lines and sorted
  // "k w sigma" lines for fitted rows.
  void Write(std::ostream& out) const;
  static SmoothingParams Read(std::istream& in);

  // Unfitted rows compare equal to each other.
  friend bool operator==(const SmoothingParams& a, const SmoothingParams& b);

 private:
  std::size_t Index(WordId w, int k) const {
    return static_cast<std::size_t>(w) * components_ + (k - 1);
  }

  WordId vocab_size_ = 0;
  int components_ = 0;
  std::vector<double> sigma_;   // V x m; NaN marks an unfitted row
  std::vector<double> fallback_;
};

using InterpolationParams = SmoothingParams;

struct SmoothingFitOptions {
  double tolerance = 1e-6;  // stop when every |delta sigma| is below this
  int max_iterations = 50;
  // Share one sigma per component across all rows.
  bool tie_rows = false;
};

// Maximizes the validation likelihood of
//   (1 - sigma(w)) P_ML(w'|w) + sigma(w) P_base(w'|w)
// per conditioning word w by one-dimensional EM started at 0.5. The fallback
// is the same fit with every event pooled.
InterpolationParams FitInterpolation(const MlBigramModel& ml, const ConditionalModel& base,
                                     const std::vector<TokenSentence>& validation,
                                     const SmoothingFitOptions& options = {});

// Jelinek-Mercer bigram. Rows the ML bigram never observed use sigma = 1 so
// every row stays normalized.
class InterpolatedBigram : public ConditionalModel {
 public:
  InterpolatedBigram(std::shared_ptr<const MlBigramModel> ml,
                     std::shared_ptr<const ConditionalModel> base, InterpolationParams params);

  int context_length() const override { return 1; }
  WordId vocab_size() const override { return ml_->vocab_size(); }
  double Prob(std::span<const WordId> context, WordId next) const override;
  // Throws ParameterError for ids out of range.
  double Prob(WordId prev, WordId next) const;

  double EffectiveSigma(WordId prev) const;
  const InterpolationParams& params() const { return params_; }

 private:
  std::shared_ptr<const MlBigramModel> ml_;
  std::shared_ptr<const ConditionalModel> base_;
  InterpolationParams params_;
};

}  // namespace mixlm

#endif  // MIXLM_INTERPOLATION_H_
