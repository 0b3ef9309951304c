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

#include "mixlm/ngram_counts.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "mixlm/error.h"
#include "mixlm/parallel.h"
#include "text_io.h"

namespace mixlm {

void PairCounts::Add(WordId a, WordId b, Count c) {
  if (c != 0) table_[Pack(a, b)] += c;
}

Count PairCounts::Get(WordId a, WordId b) const {
  auto it = table_.find(Pack(a, b));
  return it == table_.end() ? 0 : it->second;
}

std::vector<PairEntry> PairCounts::Sorted() const {
  std::vector<PairEntry> out;
  out.reserve(table_.size());
  for (const auto& [key, c] : table_) out.push_back({Unpack1(key), Unpack2(key), c});
  std::sort(out.begin(), out.end(), [](const PairEntry& x, const PairEntry& y) {
    return x.first != y.first ? x.first < y.first : x.second < y.second;
  });
  return out;
}

std::vector<Count> PairCounts::RowTotals(WordId vocab_size) const {
  std::vector<Count> totals(vocab_size, 0);
  for (const auto& [key, c] : table_) totals[Unpack1(key)] += c;
  return totals;
}

Count PairCounts::Total() const {
  Count n = 0;
  for (const auto& [key, c] : table_) n += c;
  return n;
}

void PairCounts::Merge(const PairCounts& other) {
  for (const auto& [key, c] : other.table_) table_[key] += c;
}

void TripleCounts::Add(WordId a, WordId b, WordId c, Count n) {
  if (n != 0) table_[Pack(a, b, c)] += n;
}

Count TripleCounts::Get(WordId a, WordId b, WordId c) const {
  auto it = table_.find(Pack(a, b, c));
  return it == table_.end() ? 0 : it->second;
}

std::vector<TripleEntry> TripleCounts::Sorted() const {
  std::vector<TripleEntry> out;
  out.reserve(table_.size());
  ForEach([&](WordId a, WordId b, WordId c, Count n) { out.push_back({a, b, c, n}); });
  std::sort(out.begin(), out.end(), [](const TripleEntry& x, const TripleEntry& y) {
    if (x.first != y.first) return x.first < y.first;
    if (x.second != y.second) return x.second < y.second;
    return x.third < y.third;
  });
  return out;
}

Count TripleCounts::Total() const {
  Count n = 0;
  for (const auto& [key, c] : table_) n += c;
  return n;
}

void TripleCounts::Merge(const TripleCounts& other) {
  for (const auto& [key, c] : other.table_) table_[key] += c;
}

void TripleCounts::EraseBelow(Count threshold) {
  std::erase_if(table_, [threshold](const auto& kv) { return kv.second < threshold; });
}

const PairCounts& NgramCounts::Skip(int k) const {
  auto it = skip_tables.find(k);
  if (it == skip_tables.end()) {
    throw ParameterError("skip-" + std::to_string(k) + " counts were not collected");
  }
  return it->second;
}

void NgramCounts::Merge(const NgramCounts& other) {
  if (other.vocab_size != vocab_size || other.max_order != max_order || other.skips != skips) {
    throw ParameterError("cannot merge count tables of different shapes");
  }
  for (WordId w = 0; w < vocab_size; ++w) unigrams[w] += other.unigrams[w];
  bigrams.Merge(other.bigrams);
  trigrams.Merge(other.trigrams);
  for (const auto& [k, table] : other.skip_tables) skip_tables[k].Merge(table);
  total += other.total;
}

namespace {

void WritePairs(std::ostream& out, const PairCounts& table) {
  for (const auto& e : table.Sorted()) {
    out << e.first << ' ' << e.second << ' ' << e.count << '\n';
  }
}

void CheckId(WordId id, WordId vocab_size) {
  if (id < 0 || id >= vocab_size) {
    throw IoError("word id " + std::to_string(id) + " out of range in counts file");
  }
}

}  // namespace

void NgramCounts::Write(std::ostream& out) const {
  out << "NGRAM-COUNTS v1 order=" << max_order << " skips=";
  for (std::size_t i = 0; i < skips.size(); ++i) out << (i ? "," : "") << skips[i];
  out << " V=" << vocab_size << " total=" << total << '\n';
  out << "\\1-grams\n";
  for (WordId w = 0; w < vocab_size; ++w) {
    if (unigrams[w] != 0) out << w << ' ' << unigrams[w] << '\n';
  }
  if (max_order >= 2) {
    out << "\\2-grams\n";
    WritePairs(out, bigrams);
  }
  if (max_order >= 3) {
    out << "\\3-grams\n";
    for (const auto& e : trigrams.Sorted()) {
      out << e.first << ' ' << e.second << ' ' << e.third << ' ' << e.count << '\n';
    }
  }
  for (int k : skips) {
    out << "\\skip-" << k << '\n';
    WritePairs(out, skip_tables.at(k));
  }
  out << "\\end\n";
}

NgramCounts NgramCounts::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty counts file");
  auto header = internal::ParseHeader(line, "NGRAM-COUNTS");
  NgramCounts counts;
  counts.max_order = static_cast<int>(internal::ParseInt(internal::HeaderField(header, "order")));
  counts.vocab_size = static_cast<WordId>(internal::ParseInt(internal::HeaderField(header, "V")));
  counts.total = internal::ParseUnsigned(internal::HeaderField(header, "total"));
  const std::string& skips = internal::HeaderField(header, "skips");
  std::size_t pos = 0;
  while (pos < skips.size()) {
    std::size_t comma = skips.find(',', pos);
    if (comma == std::string::npos) comma = skips.size();
    counts.skips.push_back(static_cast<int>(
        internal::ParseInt(std::string_view(skips).substr(pos, comma - pos))));
    pos = comma + 1;
  }
  if (counts.max_order < 1 || counts.max_order > 3 || counts.vocab_size <= 0 ||
      counts.vocab_size > kMaxVocabSize) {
    throw IoError("bad counts header: " + line);
  }
  counts.unigrams.assign(counts.vocab_size, 0);
  for (int k : counts.skips) counts.skip_tables[k];

  std::string section;
  PairCounts* pairs = nullptr;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '\\') {
      section = line.substr(1);
      pairs = nullptr;
      if (section == "end") {
        ended = true;
        break;
      }
      if (section == "2-grams") {
        pairs = &counts.bigrams;
      } else if (section.rfind("skip-", 0) == 0) {
        int k = static_cast<int>(internal::ParseInt(std::string_view(section).substr(5)));
        auto it = counts.skip_tables.find(k);
        if (it == counts.skip_tables.end()) throw IoError("undeclared section " + line);
        pairs = &it->second;
      } else if (section != "1-grams" && section != "3-grams") {
        throw IoError("unknown section " + line);
      }
      continue;
    }
    auto f = internal::SplitWhitespace(line);
    if (section == "1-grams" && f.size() == 2) {
      WordId w = static_cast<WordId>(internal::ParseInt(f[0]));
      CheckId(w, counts.vocab_size);
      counts.unigrams[w] += internal::ParseUnsigned(f[1]);
    } else if (pairs != nullptr && f.size() == 3) {
      WordId a = static_cast<WordId>(internal::ParseInt(f[0]));
      WordId b = static_cast<WordId>(internal::ParseInt(f[1]));
      CheckId(a, counts.vocab_size);
      CheckId(b, counts.vocab_size);
      pairs->Add(a, b, internal::ParseUnsigned(f[2]));
    } else if (section == "3-grams" && f.size() == 4) {
      WordId a = static_cast<WordId>(internal::ParseInt(f[0]));
      WordId b = static_cast<WordId>(internal::ParseInt(f[1]));
      WordId c = static_cast<WordId>(internal::ParseInt(f[2]));
      CheckId(a, counts.vocab_size);
      CheckId(b, counts.vocab_size);
      CheckId(c, counts.vocab_size);
      counts.trigrams.Add(a, b, c, internal::ParseUnsigned(f[3]));
    } else {
      throw IoError("malformed counts line: \"" + line + "\"");
    }
  }
  if (!ended) throw IoError("counts file is truncated (no \\end marker)");
  return counts;
}

namespace {

NgramCounts EmptyCounts(WordId vocab_size, int max_order, const std::vector<int>& skips) {
  NgramCounts counts;
  counts.vocab_size = vocab_size;
  counts.max_order = max_order;
  counts.skips = skips;
  counts.unigrams.assign(vocab_size, 0);
  for (int k : skips) counts.skip_tables[k];
  return counts;
}

void CountSentence(const TokenSentence& sentence, int pad, NgramCounts& counts,
                   std::vector<WordId>& padded) {
  padded.assign(pad, kStartId);
  for (WordId w : sentence) {
    if (w < 0 || w >= counts.vocab_size || w == kStartId || w == kEndId) {
      throw ParameterError("invalid interior word id " + std::to_string(w));
    }
    padded.push_back(w);
  }
  padded.push_back(kEndId);
  for (std::size_t t = pad; t < padded.size(); ++t) {
    WordId w = padded[t];
    ++counts.unigrams[w];
    if (counts.max_order >= 2) counts.bigrams.Add(padded[t - 1], w);
    if (counts.max_order >= 3) counts.trigrams.Add(padded[t - 2], padded[t - 1], w);
    for (auto& [k, table] : counts.skip_tables) table.Add(padded[t - k], w);
    ++counts.total;
  }
}

}  // namespace

NgramCounts CountNgrams(const std::vector<TokenSentence>& corpus, WordId vocab_size,
                        int max_order, std::vector<int> skips, int workers) {
  if (max_order < 1 || max_order > 3) {
    throw ParameterError("n-gram order must be 1, 2 or 3, got " + std::to_string(max_order));
  }
  if (vocab_size <= 0 || vocab_size > kMaxVocabSize) {
    throw ParameterError("vocabulary size out of range");
  }
  std::sort(skips.begin(), skips.end());
  skips.erase(std::unique(skips.begin(), skips.end()), skips.end());
  for (int k : skips) {
    if (k < 1) throw ParameterError("skip distances must be >= 1");
  }
  int pad = max_order - 1;
  if (!skips.empty()) pad = std::max(pad, skips.back());

  if (workers <= 0) workers = DefaultWorkers();
  auto bounds = SplitRange(corpus.size(), static_cast<std::size_t>(workers));
  std::vector<NgramCounts> shards(bounds.size() - 1, EmptyCounts(vocab_size, max_order, skips));
  ParallelFor(shards.size(), workers, [&](std::size_t s) {
    std::vector<WordId> padded;
    for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) {
      CountSentence(corpus[i], pad, shards[s], padded);
    }
  });
  NgramCounts counts = std::move(shards[0]);
  for (std::size_t s = 1; s < shards.size(); ++s) counts.Merge(shards[s]);
  return counts;
}

NgramCounts TruncateTrigrams(const NgramCounts& counts, Count threshold) {
  if (threshold < 1) throw ParameterError("truncation threshold must be >= 1");
  NgramCounts out = counts;
  out.trigrams.EraseBelow(threshold);
  return out;
}

}  // namespace mixlm
