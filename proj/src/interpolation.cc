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

#include "mixlm/interpolation.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "mixlm/error.h"
#include "mixlm/mixed_order_model.h"
#include "sigma_fit.h"
#include "text_io.h"

namespace mixlm {
namespace {

constexpr double kUnfitted = std::numeric_limits<double>::quiet_NaN();

void CheckSigma(double sigma) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) {
    throw ParameterError("smoothing weight outside [0, 1]: " + internal::FormatDouble(sigma));
  }
}

}  // namespace

SmoothingParams::SmoothingParams(WordId vocab_size, int components)
    : vocab_size_(vocab_size), components_(components) {
  if (vocab_size < 1 || vocab_size > kMaxVocabSize) {
    throw ParameterError("vocabulary size out of range");
  }
  if (components < 1 || components > kMaxMixedOrder) {
    throw ParameterError("component count out of range");
  }
  sigma_.assign(static_cast<std::size_t>(vocab_size) * components, kUnfitted);
  fallback_.assign(components, 0.5);
}

double SmoothingParams::Get(WordId w, int k) const {
  const double s = sigma_[Index(w, k)];
  return std::isnan(s) ? fallback_[k - 1] : s;
}

bool SmoothingParams::IsFitted(WordId w, int k) const {
  return !std::isnan(sigma_[Index(w, k)]);
}

void SmoothingParams::Set(WordId w, int k, double sigma) {
  CheckWordId(w, vocab_size_);
  if (k < 1 || k > components_) throw ParameterError("component index out of range");
  CheckSigma(sigma);
  sigma_[Index(w, k)] = sigma;
}

void SmoothingParams::SetFallback(int k, double sigma) {
  if (k < 1 || k > components_) throw ParameterError("component index out of range");
  CheckSigma(sigma);
  fallback_[k - 1] = sigma;
}

bool operator==(const SmoothingParams& a, const SmoothingParams& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.vocab_size_ == b.vocab_size_ && a.components_ == b.components_ &&
         a.fallback_ == b.fallback_ &&
         std::equal(a.sigma_.begin(), a.sigma_.end(), b.sigma_.begin(), b.sigma_.end(), same);
}

void SmoothingParams::Write(std::ostream& out) const {
  out << "SIGMA v1 V=" << vocab_size_ << " m=" << components_ << '\n';
  for (int k = 1; k <= components_; ++k) {
    out << k << " -1 " << internal::FormatDouble(fallback_[k - 1]) << '\n';
  }
  for (int k = 1; k <= components_; ++k) {
    for (WordId w = 0; w < vocab_size_; ++w) {
      if (IsFitted(w, k)) {
        out << k << ' ' << w << ' ' << internal::FormatDouble(sigma_[Index(w, k)]) << '\n';
      }
    }
  }
}

SmoothingParams SmoothingParams::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty smoothing parameter file");
  auto header = internal::ParseHeader(line, "SIGMA");
  const auto V = internal::ParseInt(internal::HeaderField(header, "V"));
  const auto m = internal::ParseInt(internal::HeaderField(header, "m"));
  if (V < 1 || V > kMaxVocabSize || m < 1 || m > kMaxMixedOrder) {
    throw IoError("bad smoothing parameter header: " + line);
  }
  SmoothingParams params(static_cast<WordId>(V), static_cast<int>(m));
  while (std::getline(in, line)) {
    auto f = internal::SplitWhitespace(line);
    if (f.empty()) continue;
    if (f.size() != 3) throw IoError("malformed smoothing line: \"" + line + "\"");
    const auto k = internal::ParseInt(f[0]);
    const auto w = internal::ParseInt(f[1]);
    const double sigma = internal::ParseDouble(f[2]);
    try {
      if (w == -1) {
        params.SetFallback(static_cast<int>(k), sigma);
      } else {
        if (w < 0 || w >= V) throw ParameterError("word id out of range");
        params.Set(static_cast<WordId>(w), static_cast<int>(k), sigma);
      }
    } catch (const ParameterError& e) {
      throw IoError("bad smoothing line \"" + line + "\": " + e.what());
    }
  }
  return params;
}

InterpolationParams FitInterpolation(const MlBigramModel& ml, const ConditionalModel& base,
                                     const std::vector<TokenSentence>& validation,
                                     const SmoothingFitOptions& options) {
  if (validation.empty()) throw DataError("empty validation corpus");
  if (base.vocab_size() != ml.vocab_size()) {
    throw ParameterError("base model vocabulary does not match the bigram");
  }
  if (base.context_length() > 1) throw ParameterError("base model needs at most one word");
  const WordId V = ml.vocab_size();
  EventTable events(validation, 1);
  internal::SigmaProblem problem;
  problem.vocab_size = V;
  problem.components = 1;
  for (std::size_t e = 0; e < events.size(); ++e) {
    auto ev = events.Event(e);
    CheckWordId(ev[0], V);
    CheckWordId(ev[1], V);
    problem.multiplicity.push_back(events.Multiplicity(e));
    problem.lower.push_back(base.Prob(Tail(ev.first(1), base.context_length()), ev[1]));
    problem.weight.push_back(1.0);
    problem.direct.push_back(ml.Prob(ev[0], ev[1]));
    problem.row.push_back(ev[0]);
  }
  return internal::FitSigmas(problem, options);
}

InterpolatedBigram::InterpolatedBigram(std::shared_ptr<const MlBigramModel> ml,
                                       std::shared_ptr<const ConditionalModel> base,
                                       InterpolationParams params)
    : ml_(std::move(ml)), base_(std::move(base)), params_(std::move(params)) {
  if (!ml_ || !base_) throw ParameterError("interpolated bigram needs both models");
  if (base_->vocab_size() != ml_->vocab_size() || params_.vocab_size() != ml_->vocab_size()) {
    throw ParameterError("interpolated bigram parts disagree on the vocabulary size");
  }
  if (base_->context_length() > 1) throw ParameterError("base model needs at most one word");
  if (params_.components() != 1) {
    throw ParameterError("bigram interpolation takes one weight per row");
  }
}

double InterpolatedBigram::EffectiveSigma(WordId prev) const {
  CheckWordId(prev, vocab_size());
  return ml_->HasRow(prev) ? params_.Get(prev, 1) : 1.0;
}

double InterpolatedBigram::Prob(std::span<const WordId> context, WordId next) const {
  CheckContext(context, 1, vocab_size());
  return Prob(context[0], next);
}

double InterpolatedBigram::Prob(WordId prev, WordId next) const {
  CheckWordId(next, vocab_size());
  const double sigma = EffectiveSigma(prev);
  const WordId ctx[1] = {prev};
  const double base = base_->Prob(Tail(ctx, base_->context_length()), next);
  if (sigma == 0.0) return ml_->Prob(prev, next);
  if (sigma == 1.0) return base;
  return (1.0 - sigma) * ml_->Prob(prev, next) + sigma * base;
}

}  // namespace mixlm
