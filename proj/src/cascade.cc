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

#include "mixlm/cascade.h"

#include <filesystem>
#include <istream>
#include <ostream>

#include "mixlm/error.h"
#include "text_io.h"

namespace mixlm {
namespace {

void CheckMixedOrders(const std::vector<std::shared_ptr<const MixedOrderModel>>& mixed) {
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    if (!mixed[i]) throw ParameterError("missing mixed-order level");
    if (mixed[i]->order() != static_cast<int>(i) + 2) {
      throw ParameterError("mixed-order levels must be m = 2, 3, ... in order; level " +
                           std::to_string(i + 2) + " has m = " +
                           std::to_string(mixed[i]->order()));
    }
  }
}

std::string Resolve(const std::string& dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || dir.empty()) return path;
  return (std::filesystem::path(dir) / p).string();
}

template <class T>
T LoadFile(const std::string& path) {
  auto in = internal::OpenInput(path);
  try {
    return T::Read(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

// Value of a "key=value" token.
std::string KeyValue(std::string_view token, std::string_view key, const std::string& line) {
  if (token.size() <= key.size() || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    throw IoError("expected " + std::string(key) + "=... in manifest line \"" + line + "\"");
  }
  return std::string(token.substr(key.size() + 1));
}

}  // namespace

SmoothedCascade SmoothedCascade::Fit(std::shared_ptr<const ConditionalModel> base,
                                     std::shared_ptr<const NgramCounts> counts,
                                     std::vector<std::shared_ptr<const MixedOrderModel>> mixed,
                                     const std::vector<TokenSentence>& validation,
                                     const CascadeOptions& options) {
  if (!base || !counts) throw ParameterError("cascade needs a base model and counts");
  if (counts->max_order < 2) throw ParameterError("cascade needs bigram counts");
  CheckMixedOrders(mixed);
  auto ml = std::make_shared<MlBigramModel>(*counts);
  InterpolationParams bigram_params = FitInterpolation(*ml, *base, validation, options.fit);

  SmoothedCascade cascade;
  cascade.base_ = base;
  cascade.counts_ = counts;
  cascade.ml_bigram_ = ml;
  cascade.bigram_ = std::make_shared<InterpolatedBigram>(ml, base, std::move(bigram_params));
  std::shared_ptr<const ConditionalModel> lower = cascade.bigram_;
  for (const auto& model : mixed) {
    auto params = FitMixedSmoothing(*model, *lower, validation, options.fit);
    auto level = std::make_shared<SmoothedMixedModel>(model, std::move(params), lower);
    cascade.mixed_levels_.push_back(level);
    lower = level;
  }
  if (options.trigram) {
    cascade.trigram_ = BuildKatzWithBackoff(*counts, options.trigram->truncate_below,
                                            options.trigram->gt_threshold,
                                            cascade.Level(std::min(cascade.max_order(), 2)));
  }
  return cascade;
}

SmoothedCascade SmoothedCascade::Assemble(
    std::shared_ptr<const ConditionalModel> base, std::shared_ptr<const NgramCounts> counts,
    InterpolationParams bigram_params, std::vector<std::shared_ptr<const MixedOrderModel>> mixed,
    std::vector<MixedSmoothingParams> mixed_params, std::optional<TrigramLevelOptions> trigram,
    std::optional<GoodTuringDiscounts> trigram_discounts) {
  if (!base || !counts) throw ParameterError("cascade needs a base model and counts");
  if (counts->max_order < 2) throw ParameterError("cascade needs bigram counts");
  CheckMixedOrders(mixed);
  if (mixed.size() != mixed_params.size()) {
    throw ParameterError("need smoothing weights for every mixed-order level");
  }
  if (trigram.has_value() != trigram_discounts.has_value()) {
    throw ParameterError("trigram level needs both options and discounts");
  }
  SmoothedCascade cascade;
  cascade.base_ = base;
  cascade.counts_ = counts;
  cascade.ml_bigram_ = std::make_shared<MlBigramModel>(*counts);
  cascade.bigram_ =
      std::make_shared<InterpolatedBigram>(cascade.ml_bigram_, base, std::move(bigram_params));
  std::shared_ptr<const ConditionalModel> lower = cascade.bigram_;
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    auto level = std::make_shared<SmoothedMixedModel>(mixed[i], std::move(mixed_params[i]), lower);
    cascade.mixed_levels_.push_back(level);
    lower = level;
  }
  if (trigram) {
    cascade.trigram_ = KatzModel::Trigram(*counts, trigram->truncate_below, *trigram_discounts,
                                          cascade.Level(std::min(cascade.max_order(), 2)));
  }
  return cascade;
}

std::shared_ptr<const ConditionalModel> SmoothedCascade::Top() const {
  if (trigram_) return trigram_;
  return Level(max_order());
}

std::shared_ptr<const ConditionalModel> SmoothedCascade::Level(int order) const {
  if (order < 1 || order > max_order()) {
    throw ParameterError("cascade has no level " + std::to_string(order));
  }
  if (order == 1) return bigram_;
  return mixed_levels_[order - 2];
}

void CascadeManifest::Write(std::ostream& out) const {
  out << "CASCADE v1\n";
  out << "base aggregate " << base_path << '\n';
  out << "counts " << counts_path << '\n';
  out << "bigram sigma=" << bigram_sigma_path << '\n';
  for (const auto& level : mixed) {
    out << "mixed " << level.order << " model=" << level.model_path
        << " sigma=" << level.sigma_path << '\n';
  }
  if (trigram) {
    out << "trigram truncate=" << trigram->truncate_below << " gt=" << trigram->gt_threshold
        << " discounts=" << trigram->discounts_path << '\n';
  }
}

CascadeManifest CascadeManifest::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || internal::SplitWhitespace(line) !=
                                     std::vector<std::string_view>{"CASCADE", "v1"}) {
    throw IoError("not a cascade manifest");
  }
  CascadeManifest m;
  bool have_base = false, have_counts = false, have_bigram = false;
  while (std::getline(in, line)) {
    auto f = internal::SplitWhitespace(line);
    if (f.empty()) continue;
    if (f[0] == "base" && f.size() == 3 && f[1] == "aggregate") {
      m.base_path = std::string(f[2]);
      have_base = true;
    } else if (f[0] == "counts" && f.size() == 2) {
      m.counts_path = std::string(f[1]);
      have_counts = true;
    } else if (f[0] == "bigram" && f.size() == 2) {
      m.bigram_sigma_path = KeyValue(f[1], "sigma", line);
      have_bigram = true;
    } else if (f[0] == "mixed" && f.size() == 4) {
      MixedLevel level;
      level.order = static_cast<int>(internal::ParseInt(f[1]));
      level.model_path = KeyValue(f[2], "model", line);
      level.sigma_path = KeyValue(f[3], "sigma", line);
      m.mixed.push_back(std::move(level));
    } else if (f[0] == "trigram" && f.size() == 4) {
      TrigramLevel level;
      level.truncate_below = internal::ParseUnsigned(KeyValue(f[1], "truncate", line));
      level.gt_threshold = static_cast<int>(internal::ParseInt(KeyValue(f[2], "gt", line)));
      level.discounts_path = KeyValue(f[3], "discounts", line);
      m.trigram = std::move(level);
    } else {
      throw IoError("unrecognized manifest line: \"" + line + "\"");
    }
  }
  if (!have_base || !have_counts || !have_bigram) {
    throw IoError("manifest lacks a base, counts or bigram line");
  }
  return m;
}

SmoothedCascade LoadCascade(const CascadeManifest& manifest, const std::string& dir) {
  auto base =
      std::make_shared<AggregateModel>(LoadFile<AggregateModel>(Resolve(dir, manifest.base_path)));
  auto counts =
      std::make_shared<NgramCounts>(LoadFile<NgramCounts>(Resolve(dir, manifest.counts_path)));
  auto bigram_params = LoadFile<SmoothingParams>(Resolve(dir, manifest.bigram_sigma_path));
  std::vector<std::shared_ptr<const MixedOrderModel>> mixed;
  std::vector<MixedSmoothingParams> mixed_params;
  for (const auto& level : manifest.mixed) {
    mixed.push_back(std::make_shared<MixedOrderModel>(
        LoadFile<MixedOrderModel>(Resolve(dir, level.model_path))));
    mixed_params.push_back(LoadFile<SmoothingParams>(Resolve(dir, level.sigma_path)));
  }
  std::optional<TrigramLevelOptions> trigram;
  std::optional<GoodTuringDiscounts> discounts;
  if (manifest.trigram) {
    trigram = TrigramLevelOptions{manifest.trigram->truncate_below,
                                  manifest.trigram->gt_threshold};
    discounts = LoadFile<GoodTuringDiscounts>(Resolve(dir, manifest.trigram->discounts_path));
  }
  return SmoothedCascade::Assemble(base, counts, std::move(bigram_params), std::move(mixed),
                                   std::move(mixed_params), trigram, discounts);
}

}  // namespace mixlm
