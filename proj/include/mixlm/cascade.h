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
// A smoothing chain, bottom to top:
//
//   aggregate base -> interpolated bigram -> smoothed mixed m=2 -> ... ->
//   smoothed mixed m=M -> [Katz trigram backing off to the m=2 level]
//
// Levels are fit strictly bottom-up on held-out data.

#ifndef MIXLM_CASCADE_H_
#define MIXLM_CASCADE_H_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mixlm/aggregate_model.h"
#include "mixlm/conditional_model.h"
#include "mixlm/interpolation.h"
#include "mixlm/katz.h"
#include "mixlm/mixed_order_model.h"
#include "mixlm/mixed_smoothing.h"
#include "mixlm/ngram_counts.h"

namespace mixlm {

struct TrigramLevelOptions {
  Count truncate_below = 1;
  int gt_threshold = kDefaultGoodTuringThreshold;
};

struct CascadeOptions {
  SmoothingFitOptions fit;
  std::optional<TrigramLevelOptions> trigram;
};

class SmoothedCascade {
 public:
  // `mixed` must hold orders 2, 3, ..., M in that order (possibly empty).
  static SmoothedCascade Fit(std::shared_ptr<const ConditionalModel> base,
                             std::shared_ptr<const NgramCounts> counts,
                             std::vector<std::shared_ptr<const MixedOrderModel>> mixed,
                             const std::vector<TokenSentence>& validation,
                             const CascadeOptions& options = {});

  // Rebuilds a fitted cascade from stored parameters.
  static SmoothedCascade Assemble(std::shared_ptr<const ConditionalModel> base,
                                  std::shared_ptr<const NgramCounts> counts,
                                  InterpolationParams bigram_params,
                                  std::vector<std::shared_ptr<const MixedOrderModel>> mixed,
                                  std::vector<MixedSmoothingParams> mixed_params,
                                  std::optional<TrigramLevelOptions> trigram,
                                  std::optional<GoodTuringDiscounts> trigram_discounts);

  // Highest level: the trigram when present, else the top mixed level.
  std::shared_ptr<const ConditionalModel> Top() const;
  // Order 1 is the interpolated bigram, order m >= 2 the smoothed mixed level.
  std::shared_ptr<const ConditionalModel> Level(int order) const;
  int max_order() const { return static_cast<int>(mixed_levels_.size()) + 1; }

  const InterpolatedBigram& bigram() const { return *bigram_; }
  const SmoothedMixedModel& mixed_level(int order) const { return *mixed_levels_[order - 2]; }
  // Null without a trigram level.
  std::shared_ptr<const KatzModel> trigram() const { return trigram_; }
  const std::shared_ptr<const NgramCounts>& counts() const { return counts_; }

 private:
  std::shared_ptr<const ConditionalModel> base_;
  std::shared_ptr<const NgramCounts> counts_;
  std::shared_ptr<const MlBigramModel> ml_bigram_;
  std::shared_ptr<const InterpolatedBigram> bigram_;
  std::vector<std::shared_ptr<const SmoothedMixedModel>> mixed_levels_;
  std::shared_ptr<const KatzModel> trigram_;
};

// Text manifest naming the files behind each level:
//
//   CASCADE v1
//   base aggregate <path>
//   counts <path>
//   bigram sigma=<path>
//   mixed <m> model=<path> sigma=<path>
//   trigram truncate=<t> gt=<k> discounts=<path>
//
// Relative paths resolve against the manifest's directory.
struct CascadeManifest {
  struct MixedLevel {
    int order = 0;
    std::string model_path;
    std::string sigma_path;
  };
  struct TrigramLevel {
    Count truncate_below = 1;
    int gt_threshold = kDefaultGoodTuringThreshold;
    std::string discounts_path;
  };

  std::string base_path;
  std::string counts_path;
  std::string bigram_sigma_path;
  std::vector<MixedLevel> mixed;
  std::optional<TrigramLevel> trigram;

  std::size_t num_levels() const { return 2 + mixed.size() + (trigram ? 1 : 0); }

  void Write(std::ostream& out) const;
  static CascadeManifest Read(std::istream& in);
};

// Loads every file the manifest names (relative to `dir`) and assembles it.
SmoothedCascade LoadCascade(const CascadeManifest& manifest, const std::string& dir);

}  // namespace mixlm

#endif  // MIXLM_CASCADE_H_
