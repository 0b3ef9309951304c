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
// Sentence probabilities, perplexity and unseen-event statistics for any
// conditional model.

#ifndef MIXLM_EVAL_H_
#define MIXLM_EVAL_H_

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixlm/conditional_model.h"
#include "mixlm/ngram_counts.h"
#include "mixlm/types.h"

namespace mixlm {

class KatzModel;

// Classifies an event as seen in training. The history has two ids (oldest
// first, start-padded); the predicate reads as many as it needs.
using SeenPredicate = std::function<bool(std::span<const WordId> history, WordId next)>;

// Seen iff the bigram (w_{t-1}, w_t) has a nonzero count.
SeenPredicate BigramSeenPredicate(std::shared_ptr<const NgramCounts> counts);
// Seen iff the model scores the event without backing off.
SeenPredicate KatzSeenPredicate(std::shared_ptr<const KatzModel> model);

struct EventFlags {
  bool zero_probability = false;
  bool unseen = false;  // predicate said "not seen"
};

struct SentenceScore {
  double log_prob = 0.0;  // natural log over nonzero events
  std::vector<EventFlags> events;  // n + 1 entries
};

// Sum of ln P(w_i | history) for i = 1..n+1 including the end marker.
// Zero-probability events are flagged and left out of the sum.
SentenceScore SentenceLogProb(const ConditionalModel& model, const TokenSentence& sentence,
                              const SeenPredicate& seen = nullptr);

struct EvalReport {
  Count events = 0;
  Count scored_events = 0;  // events with nonzero probability
  Count zero_events = 0;
  double log_likelihood = 0.0;  // nats, over scored events
  double perplexity = 0.0;      // exp(-log_likelihood / scored_events)

  // Present when a seen predicate was supplied and some scored event was
  // unseen.
  std::optional<double> unseen_perplexity;
  Count unseen_events = 0;        // scored events the predicate rejects
  double unseen_fraction = 0.0;   // unseen_events / events
  double unseen_log_likelihood = 0.0;

  // Field-wise sum; perplexities are recomputed.
  void Merge(const EvalReport& other);
  void Finalize();

  std::string ToJson() const;
  std::string ToText() const;
};

// Throws DataError("no scorable events") when every event has probability 0.
// Sentences are split into fixed shards, so the report does not depend on
// `workers`.
EvalReport Evaluate(const ConditionalModel& model, const std::vector<TokenSentence>& corpus,
                    const SeenPredicate& seen = nullptr, int workers = 1);

// Perplexity over events the predicate marks unseen, with their fraction of
// all events. No unseen events gives an empty value.
struct UnseenResult {
  std::optional<double> perplexity;
  double fraction = 0.0;
};
UnseenResult UnseenPerplexity(const ConditionalModel& model,
                              const std::vector<TokenSentence>& corpus,
                              const SeenPredicate& seen, int workers = 1);

// One row of a sweep table.
struct SweepRow {
  std::string model_id;
  double perplexity = 0.0;
  std::optional<double> unseen_perplexity;
  double backoff_fraction = 0.0;
  double missing_fraction = 0.0;
};
void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace mixlm

#endif  // MIXLM_EVAL_H_
