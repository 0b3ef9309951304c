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

#include "mixlm/mixed_smoothing.h"

#include "mixlm/error.h"
#include "sigma_fit.h"

namespace mixlm {

DiscountedWeights DiscountWeights(std::span<const double> lambdas,
                                  std::span<const double> sigmas) {
  if (lambdas.empty() || lambdas.size() != sigmas.size()) {
    throw ParameterError("need one sigma per lambda");
  }
  DiscountedWeights out;
  out.discounted.resize(lambdas.size());
  double remaining = 1.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lam = k + 1 == lambdas.size() ? 1.0 : lambdas[k];
    const double sigma = sigmas[k];
    if (!(lam >= 0.0 && lam <= 1.0) || !(sigma >= 0.0 && sigma <= 1.0)) {
      throw ParameterError("weights must lie in [0, 1]");
    }
    const double mu = remaining * lam;
    out.discounted[k] = (1.0 - sigma) * mu;
    out.leftover += sigma * mu;
    remaining *= 1.0 - lam;
  }
  return out;
}

SmoothedMixedModel::SmoothedMixedModel(std::shared_ptr<const MixedOrderModel> model,
                                       MixedSmoothingParams params,
                                       std::shared_ptr<const ConditionalModel> lower)
    : model_(std::move(model)), params_(std::move(params)), lower_(std::move(lower)) {
  if (!model_ || !lower_) throw ParameterError("smoothed mixed model needs both levels");
  if (lower_->vocab_size() != model_->vocab_size() ||
      params_.vocab_size() != model_->vocab_size()) {
    throw ParameterError("smoothed mixed model parts disagree on the vocabulary size");
  }
  if (params_.components() != model_->order()) {
    throw ParameterError("need one smoothing weight per skip component");
  }
  if (lower_->context_length() >= model_->order()) {
    throw ParameterError("lower model must use a shorter context");
  }
}

double SmoothedMixedModel::EffectiveSigma(WordId w, int k) const {
  return model_->Skip(k).HasRow(w) ? params_.Get(w, k) : 1.0;
}

double SmoothedMixedModel::Prob(std::span<const WordId> context, WordId next) const {
  const int m = model_->order();
  CheckContext(context, m, vocab_size());
  CheckWordId(next, vocab_size());
  double kept = 0.0, leftover = 0.0, remaining = 1.0;
  for (int k = 1; k <= m; ++k) {
    const WordId wk = context[m - k];
    const double lam = k == m ? 1.0 : model_->Lambda(wk, k);
    const double mu = remaining * lam;
    const double sigma = EffectiveSigma(wk, k);
    if (sigma < 1.0) kept += (1.0 - sigma) * mu * model_->Skip(k).Get(wk, next);
    leftover += sigma * mu;
    remaining *= 1.0 - lam;
  }
  if (leftover == 0.0) return kept;
  return kept + leftover * lower_->Prob(Tail(context, lower_->context_length()), next);
}

MixedSmoothingParams FitMixedSmoothing(const MixedOrderModel& model,
                                       const ConditionalModel& lower,
                                       const std::vector<TokenSentence>& validation,
                                       const SmoothingFitOptions& options) {
  if (validation.empty()) throw DataError("empty validation corpus");
  if (lower.vocab_size() != model.vocab_size()) {
    throw ParameterError("lower model vocabulary does not match");
  }
  if (lower.context_length() >= model.order()) {
    throw ParameterError("lower model must use a shorter context");
  }
  const int m = model.order();
  const WordId V = model.vocab_size();
  EventTable events(validation, m);
  internal::SigmaProblem problem;
  problem.vocab_size = V;
  problem.components = m;
  for (std::size_t e = 0; e < events.size(); ++e) {
    auto ev = events.Event(e);
    for (WordId w : ev) CheckWordId(w, V);
    auto context = ev.first(m);
    const WordId next = ev[m];
    problem.multiplicity.push_back(events.Multiplicity(e));
    problem.lower.push_back(lower.Prob(Tail(context, lower.context_length()), next));
    double remaining = 1.0;
    for (int k = 1; k <= m; ++k) {
      const WordId wk = context[m - k];
      const double lam = k == m ? 1.0 : model.Lambda(wk, k);
      problem.weight.push_back(remaining * lam);
      problem.direct.push_back(model.Skip(k).Get(wk, next));
      problem.row.push_back(wk);
      remaining *= 1.0 - lam;
    }
  }
  return internal::FitSigmas(problem, options);
}

}  // namespace mixlm
