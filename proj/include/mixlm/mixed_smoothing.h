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
// Recursive smoothing of mixed-order models: each skip-k prediction keeps
// a fraction 1 - sigma_k(w_{t-k}) of its mixture weight and the released
// mass goes to the order m-1 model.

#ifndef MIXLM_MIXED_SMOOTHING_H_
#define MIXLM_MIXED_SMOOTHING_H_

#include <memory>
#include <span>
#include <vector>

#include "mixlm/conditional_model.h"
#include "mixlm/interpolation.h"
#include "mixlm/mixed_order_model.h"
#include "mixlm/types.h"

namespace mixlm {

using MixedSmoothingParams = SmoothingParams;

struct DiscountedWeights {
  // [1 - sigma_k] lambda_k prod_{j<k} [1 - lambda_j], k = 1..m
  std::vector<double> discounted;
  // sum_k sigma_k lambda_k prod_{j<k} [1 - lambda_j]
  double leftover = 0.0;
};

// lambdas[k-1] = lambda_k(w_{t-k}), sigmas[k-1] = sigma_k(w_{t-k}). The last
// lambda is treated as 1 whatever its stored value.
DiscountedWeights DiscountWeights(std::span<const double> lambdas,
                                  std::span<const double> sigmas);

class SmoothedMixedModel : public ConditionalModel {
 public:
  // `lower` must have context length m - 1.
  SmoothedMixedModel(std::shared_ptr<const MixedOrderModel> model, MixedSmoothingParams params,
                     std::shared_ptr<const ConditionalModel> lower);

  int context_length() const override { return model_->order(); }
  WordId vocab_size() const override { return model_->vocab_size(); }
  // Throws ParameterError when the context holds fewer than m ids.
  double Prob(std::span<const WordId> context, WordId next) const override;

  // sigma_k(w), or 1 when row w of M_k is absent.
  double EffectiveSigma(WordId w, int k) const;
  const MixedSmoothingParams& params() const { return params_; }
  const MixedOrderModel& model() const { return *model_; }

 private:
  std::shared_ptr<const MixedOrderModel> model_;
  MixedSmoothingParams params_;
  std::shared_ptr<const ConditionalModel> lower_;
};

// Fits sigma_k(w) by EM on validation events. The hidden variable is which
// of the 2m branches generated each word: component k used directly, or
// component k handing its mass to the lower model. Unobserved (k, w) get a
// per-k fallback fitted with rows tied.
MixedSmoothingParams FitMixedSmoothing(const MixedOrderModel& model,
                                       const ConditionalModel& lower,
                                       const std::vector<TokenSentence>& validation,
                                       const SmoothingFitOptions& options = {});

}  // namespace mixlm

#endif  // MIXLM_MIXED_SMOOTHING_H_
