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

#include "mixlm/katz.h"

#include <algorithm>
#include <istream>
#include <ostream>

#include "mixlm/error.h"
#include "text_io.h"

namespace mixlm {
namespace {

// Below this much unseen backoff mass a context cannot hand anything on.
constexpr double kNoRoom = 1e-12;

void CheckThreshold(int threshold) {
  if (threshold < 1) throw ParameterError("Good-Turing threshold must be >= 1");
}

}  // namespace

std::vector<Count> CountOfCounts(const PairCounts& counts, Count max_r) {
  std::vector<Count> n(max_r + 1, 0);
  counts.ForEach([&](WordId, WordId, Count r) {
    if (r <= max_r) ++n[r];
  });
  return n;
}

std::vector<Count> CountOfCounts(const TripleCounts& counts, Count max_r) {
  std::vector<Count> n(max_r + 1, 0);
  counts.ForEach([&](WordId, WordId, WordId, Count r) {
    if (r <= max_r) ++n[r];
  });
  return n;
}

double GoodTuringAdjustedCount(std::span<const Count> n, Count r) {
  if (r + 1 >= n.size()) throw ParameterError("count-of-counts table too short");
  if (n[r] == 0) return 0.0;
  return static_cast<double>(r + 1) * static_cast<double>(n[r + 1]) /
         static_cast<double>(n[r]);
}

GoodTuringDiscounts ComputeGoodTuring(std::span<const Count> n, int threshold) {
  CheckThreshold(threshold);
  const std::size_t k = static_cast<std::size_t>(threshold);
  if (n.size() < k + 2) throw ParameterError("count-of-counts table too short");
  GoodTuringDiscounts gt;
  gt.threshold = threshold;
  gt.ratios.assign(k, 1.0);
  if (n[1] == 0) {
    gt.warnings.push_back("n_1 = 0; no discounting");
    return gt;
  }
  const double a = static_cast<double>(k + 1) * static_cast<double>(n[k + 1]) /
                   static_cast<double>(n[1]);
  for (std::size_t r = 1; r <= k; ++r) {
    const std::string label = "d_" + std::to_string(r);
    if (n[r] == 0 || n[r + 1] == 0) {
      gt.warnings.push_back(label + ": n_" + std::to_string(n[r] == 0 ? r : r + 1) +
                            " = 0; set to 1");
      continue;
    }
    const double r_star = GoodTuringAdjustedCount(n, r);
    const double d = (r_star / static_cast<double>(r) - a) / (1.0 - a);
    if (!(1.0 - a > 0.0) || !(d > 0.0 && d <= 1.0)) {
      gt.warnings.push_back(label + " = " + internal::FormatDouble(d) +
                            " outside (0, 1]; set to 1");
      continue;
    }
    gt.ratios[r - 1] = d;
  }
  return gt;
}

GoodTuringDiscounts ComputeGoodTuring(const TripleCounts& counts, int threshold) {
  CheckThreshold(threshold);
  if (counts.empty()) throw DataError("empty trigram table");
  return ComputeGoodTuring(CountOfCounts(counts, threshold + 1), threshold);
}

GoodTuringDiscounts ComputeGoodTuring(const PairCounts& counts, int threshold) {
  CheckThreshold(threshold);
  if (counts.empty()) throw DataError("empty bigram table");
  return ComputeGoodTuring(CountOfCounts(counts, threshold + 1), threshold);
}

void GoodTuringDiscounts::Write(std::ostream& out) const {
  out << "GT v1 threshold=" << threshold << '\n';
  for (int r = 1; r <= threshold; ++r) {
    out << r << ' ' << internal::FormatDouble(ratios[r - 1]) << '\n';
  }
}

GoodTuringDiscounts GoodTuringDiscounts::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty discount file");
  auto header = internal::ParseHeader(line, "GT");
  const auto k = internal::ParseInt(internal::HeaderField(header, "threshold"));
  if (k < 1 || k > 1000) throw IoError("bad discount threshold: " + line);
  GoodTuringDiscounts gt;
  gt.threshold = static_cast<int>(k);
  gt.ratios.assign(k, 1.0);
  std::vector<char> seen(k, 0);
  while (std::getline(in, line)) {
    auto f = internal::SplitWhitespace(line);
    if (f.empty()) continue;
    if (f.size() != 2) throw IoError("malformed discount line: \"" + line + "\"");
    const auto r = internal::ParseInt(f[0]);
    const double d = internal::ParseDouble(f[1]);
    if (r < 1 || r > k || !(d > 0.0 && d <= 1.0)) {
      throw IoError("bad discount line: \"" + line + "\"");
    }
    gt.ratios[r - 1] = d;
    seen[r - 1] = 1;
  }
  for (char s : seen) {
    if (!s) throw IoError("discount file is missing a ratio");
  }
  return gt;
}

KatzModel::KatzModel(int order, WordId vocab_size, GoodTuringDiscounts discounts,
                     std::shared_ptr<const ConditionalModel> backoff)
    : order_(order),
      vocab_size_(vocab_size),
      discounts_(std::move(discounts)),
      backoff_(std::move(backoff)) {
  if (!backoff_) throw ParameterError("Katz model needs a backoff model");
  if (backoff_->vocab_size() != vocab_size_) {
    throw ParameterError("backoff vocabulary does not match the counts");
  }
  if (backoff_->context_length() > order_ - 1) {
    throw ParameterError("backoff model uses a longer context than the Katz model");
  }
  CheckThreshold(discounts_.threshold);
  if (discounts_.ratios.size() != static_cast<std::size_t>(discounts_.threshold)) {
    throw ParameterError("discount table does not match its threshold");
  }
}

std::shared_ptr<KatzModel> KatzModel::Bigram(const NgramCounts& counts,
                                             const GoodTuringDiscounts& discounts,
                                             std::shared_ptr<const ConditionalModel> backoff) {
  if (counts.max_order < 2) throw ParameterError("Katz bigram needs bigram counts");
  std::shared_ptr<KatzModel> model(new KatzModel(2, counts.vocab_size, discounts, backoff));
  for (const auto& e : counts.bigrams.Sorted()) {
    const std::uint64_t h = static_cast<std::uint64_t>(e.first);
    model->ngrams_.emplace(Extend(h, e.second), e.count);
    model->contexts_[h].total += e.count;
  }
  model->ComputeBackoffWeights();
  return model;
}

std::shared_ptr<KatzModel> KatzModel::Trigram(const NgramCounts& counts, Count truncate_below,
                                              const GoodTuringDiscounts& discounts,
                                              std::shared_ptr<const ConditionalModel> backoff) {
  if (counts.max_order < 3) throw ParameterError("Katz trigram needs trigram counts");
  if (truncate_below < 1) throw ParameterError("truncation threshold must be >= 1");
  std::shared_ptr<KatzModel> model(new KatzModel(3, counts.vocab_size, discounts, backoff));
  std::unordered_map<std::uint64_t, Count> totals;
  for (const auto& e : counts.trigrams.Sorted()) {
    const std::uint64_t h = Extend(static_cast<std::uint64_t>(e.first), e.second);
    totals[h] += e.count;
    if (e.count >= truncate_below) {
      model->ngrams_.emplace(Extend(h, e.third), e.count);
      model->contexts_[h];
    }
  }
  for (auto& [h, ctx] : model->contexts_) ctx.total = totals[h];
  model->ComputeBackoffWeights();
  return model;
}

std::uint64_t KatzModel::ContextKey(std::span<const WordId> context) const {
  std::uint64_t key = 0;
  for (WordId w : context) key = Extend(key, w);
  return key;
}

void KatzModel::ComputeBackoffWeights() {
  // Sorted so the sums are accumulated in a fixed order.
  std::vector<std::uint64_t> keys;
  keys.reserve(ngrams_.size());
  for (const auto& [key, c] : ngrams_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());

  std::unordered_map<std::uint64_t, std::pair<double, double>> sums;  // seen, backoff
  const int n = order_ - 1;
  std::vector<WordId> context(n);
  for (std::uint64_t key : keys) {
    const std::uint64_t h = key >> 21;
    const WordId next = static_cast<WordId>(key & (kMaxVocabSize - 1));
    for (int i = n - 1; i >= 0; --i) {
      context[i] = static_cast<WordId>((h >> (21 * (n - 1 - i))) & (kMaxVocabSize - 1));
    }
    const Count r = ngrams_.at(key);
    const Context& ctx = contexts_.at(h);
    auto& [seen, back] = sums[h];
    seen += discounts_.Ratio(r) * static_cast<double>(r) / static_cast<double>(ctx.total);
    back += backoff_->Prob(Tail(context, backoff_->context_length()), next);
  }
  for (auto& [h, ctx] : contexts_) {
    const auto [seen, back] = sums.at(h);
    const double left = std::max(0.0, 1.0 - seen);
    const double room = 1.0 - back;
    if (room > kNoRoom) {
      ctx.alpha = left / room;
    } else {
      ctx.alpha = 0.0;
      ctx.seen_scale = seen > 0.0 ? 1.0 / seen : 1.0;
    }
  }
}

double KatzModel::Prob(std::span<const WordId> context, WordId next) const {
  CheckContext(context, order_ - 1, vocab_size_);
  CheckWordId(next, vocab_size_);
  const std::uint64_t h = ContextKey(context);
  auto ctx = contexts_.find(h);
  auto backoff = [&] { return backoff_->Prob(Tail(context, backoff_->context_length()), next); };
  if (ctx == contexts_.end()) return backoff();
  auto it = ngrams_.find(Extend(h, next));
  if (it != ngrams_.end()) {
    const Count r = it->second;
    return ctx->second.seen_scale * discounts_.Ratio(r) * static_cast<double>(r) /
           static_cast<double>(ctx->second.total);
  }
  return ctx->second.alpha == 0.0 ? 0.0 : ctx->second.alpha * backoff();
}

bool KatzModel::Seen(std::span<const WordId> context, WordId next) const {
  CheckContext(context, order_ - 1, vocab_size_);
  CheckWordId(next, vocab_size_);
  return ngrams_.count(Extend(ContextKey(context), next)) != 0;
}

std::shared_ptr<KatzModel> BuildKatzBaseline(const NgramCounts& counts, Count truncate_below,
                                             int gt_threshold) {
  auto unigram = std::make_shared<UnigramModel>(counts);
  auto bigram =
      KatzModel::Bigram(counts, ComputeGoodTuring(counts.bigrams, gt_threshold), unigram);
  return BuildKatzWithBackoff(counts, truncate_below, gt_threshold, bigram);
}

std::shared_ptr<KatzModel> BuildKatzWithBackoff(const NgramCounts& counts, Count truncate_below,
                                                int gt_threshold,
                                                std::shared_ptr<const ConditionalModel> backoff) {
  if (counts.max_order < 3) throw ParameterError("Katz trigram needs trigram counts");
  return KatzModel::Trigram(counts, truncate_below,
                            ComputeGoodTuring(counts.trigrams, gt_threshold), std::move(backoff));
}

}  // namespace mixlm
