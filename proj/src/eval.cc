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

#include "mixlm/eval.h"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "mixlm/error.h"
#include "mixlm/katz.h"
#include "mixlm/parallel.h"
#include "text_io.h"

namespace mixlm {
namespace {

constexpr std::size_t kEvalShards = 64;

std::string OptionalText(const std::optional<double>& v) {
  return v ? internal::FormatDouble(*v) : "n/a";
}

}  // namespace

SeenPredicate BigramSeenPredicate(std::shared_ptr<const NgramCounts> counts) {
  if (!counts || counts->max_order < 2) throw ParameterError("bigram predicate needs bigrams");
  return [counts](std::span<const WordId> history, WordId next) {
    return counts->bigrams.Get(history.back(), next) > 0;
  };
}

SeenPredicate KatzSeenPredicate(std::shared_ptr<const KatzModel> model) {
  if (!model) throw ParameterError("Katz predicate needs a model");
  return [model](std::span<const WordId> history, WordId next) {
    return model->Seen(Tail(history, model->context_length()), next);
  };
}

SentenceScore SentenceLogProb(const ConditionalModel& model, const TokenSentence& sentence,
                              const SeenPredicate& seen) {
  const WordId V = model.vocab_size();
  const int pad = std::max(model.context_length(), 2);
  std::vector<WordId> history(pad, kStartId);
  history.reserve(pad + sentence.size() + 1);
  for (WordId w : sentence) CheckWordId(w, V);
  SentenceScore score;
  score.events.reserve(sentence.size() + 1);
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    const WordId next = i < sentence.size() ? sentence[i] : kEndId;
    std::span<const WordId> h(history);
    EventFlags flags;
    const double p = model.Prob(Tail(h, model.context_length()), next);
    if (p > 0.0) {
      score.log_prob += std::log(p);
    } else {
      flags.zero_probability = true;
    }
    if (seen) flags.unseen = !seen(Tail(h, 2), next);
    score.events.push_back(flags);
    history.push_back(next);
  }
  return score;
}

void EvalReport::Merge(const EvalReport& other) {
  events += other.events;
  scored_events += other.scored_events;
  zero_events += other.zero_events;
  log_likelihood += other.log_likelihood;
  unseen_events += other.unseen_events;
  unseen_log_likelihood += other.unseen_log_likelihood;
  Finalize();
}

void EvalReport::Finalize() {
  perplexity = scored_events == 0
                   ? 0.0
                   : std::exp(-log_likelihood / static_cast<double>(scored_events));
  unseen_fraction =
      events == 0 ? 0.0 : static_cast<double>(unseen_events) / static_cast<double>(events);
  if (unseen_events > 0) {
    unseen_perplexity = std::exp(-unseen_log_likelihood / static_cast<double>(unseen_events));
  } else {
    unseen_perplexity.reset();
  }
}

std::string EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["events"] = events;
  j["scored_events"] = scored_events;
  j["zero_events"] = zero_events;
  j["log_likelihood"] = log_likelihood;
  j["perplexity"] = perplexity;
  j["unseen_events"] = unseen_events;
  j["unseen_fraction"] = unseen_fraction;
  j["unseen_log_likelihood"] = unseen_log_likelihood;
  j["unseen_perplexity"] = unseen_perplexity ? nlohmann::ordered_json(*unseen_perplexity)
                                             : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string EvalReport::ToText() const {
  const std::pair<const char*, std::string> rows[] = {
      {"events", std::to_string(events)},
      {"scored_events", std::to_string(scored_events)},
      {"zero_events", std::to_string(zero_events)},
      {"log_likelihood", internal::FormatDouble(log_likelihood)},
      {"perplexity", internal::FormatDouble(perplexity)},
      {"unseen_events", std::to_string(unseen_events)},
      {"unseen_fraction", internal::FormatDouble(unseen_fraction)},
      {"unseen_perplexity", OptionalText(unseen_perplexity)},
  };
  std::ostringstream out;
  for (const auto& [key, value] : rows) out << std::left << std::setw(20) << key << value << '\n';
  return out.str();
}

EvalReport Evaluate(const ConditionalModel& model, const std::vector<TokenSentence>& corpus,
                    const SeenPredicate& seen, int workers) {
  auto bounds = SplitRange(corpus.size(), kEvalShards);
  std::vector<EvalReport> shards(bounds.size() - 1);
  ParallelFor(shards.size(), workers, [&](std::size_t s) {
    EvalReport& r = shards[s];
    for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) {
      const TokenSentence& sentence = corpus[i];
      const int pad = std::max(model.context_length(), 2);
      std::vector<WordId> history(pad, kStartId);
      for (WordId w : sentence) CheckWordId(w, model.vocab_size());
      for (std::size_t t = 0; t <= sentence.size(); ++t) {
        const WordId next = t < sentence.size() ? sentence[t] : kEndId;
        std::span<const WordId> h(history);
        const double p = model.Prob(Tail(h, model.context_length()), next);
        ++r.events;
        if (p > 0.0) {
          const double lp = std::log(p);
          ++r.scored_events;
          r.log_likelihood += lp;
          if (seen && !seen(Tail(h, 2), next)) {
            ++r.unseen_events;
            r.unseen_log_likelihood += lp;
          }
        } else {
          ++r.zero_events;
        }
        history.push_back(next);
      }
    }
  });
  EvalReport report;
  for (const auto& s : shards) report.Merge(s);
  if (report.scored_events == 0) throw DataError("no scorable events");
  report.Finalize();
  return report;
}

UnseenResult UnseenPerplexity(const ConditionalModel& model,
                              const std::vector<TokenSentence>& corpus, const SeenPredicate& seen,
                              int workers) {
  if (!seen) throw ParameterError("unseen perplexity needs a seen predicate");
  EvalReport report = Evaluate(model, corpus, seen, workers);
  return {report.unseen_perplexity, report.unseen_fraction};
}

void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "model,perplexity,unseen_perplexity,backoff_fraction,missing_fraction\n";
  for (const auto& row : rows) {
    out << row.model_id << ',' << internal::FormatDouble(row.perplexity) << ','
        << (row.unseen_perplexity ? internal::FormatDouble(*row.unseen_perplexity) : "") << ','
        << internal::FormatDouble(row.backoff_fraction) << ','
        << internal::FormatDouble(row.missing_fraction) << '\n';
  }
}

}  // namespace mixlm
