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

#include "mixlm/run_config.h"

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "mixlm/error.h"
#include "mixlm/mixed_order_model.h"
#include "mixlm/ngram_counts.h"
#include "text_io.h"

namespace mixlm {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCommas(const std::string& value) {
  std::vector<std::string> out;
  if (value.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.push_back(Trim(value.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
std::string Join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

int ToInt(const std::string& key, const std::string& value) {
  try {
    const auto v = internal::ParseInt(value);
    if (v < INT32_MIN || v > INT32_MAX) throw IoError("out of range");
    return static_cast<int>(v);
  } catch (const IoError&) {
    throw ParameterError(key + ": expected an integer, got \"" + value + "\"");
  }
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParameterError(key + ": expected true or false, got \"" + value + "\"");
}

// Field accessors by key, in file order.
struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MIXLM_STRING_FIELD(name)                                              \
  {#name, {[](RunConfig& c, const std::string& v) { c.name = v; },            \
           [](const RunConfig& c) { return c.name; }}}
#define MIXLM_INT_FIELD(name)                                                 \
  {#name, {[](RunConfig& c, const std::string& v) { c.name = ToInt(#name, v); }, \
           [](const RunConfig& c) { return std::to_string(c.name); }}}
#define MIXLM_BOOL_FIELD(name)                                                \
  {#name, {[](RunConfig& c, const std::string& v) { c.name = ToBool(#name, v); }, \
           [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }}}

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      MIXLM_STRING_FIELD(subcommand),
      MIXLM_STRING_FIELD(corpus),
      MIXLM_STRING_FIELD(test),
      MIXLM_STRING_FIELD(valid),
      MIXLM_STRING_FIELD(vocab),
      MIXLM_STRING_FIELD(counts),
      MIXLM_STRING_FIELD(model),
      MIXLM_STRING_FIELD(model_type),
      MIXLM_STRING_FIELD(aggregate),
      {"mixed",
       {[](RunConfig& c, const std::string& v) { c.mixed = SplitCommas(v); },
        [](const RunConfig& c) { return Join(c.mixed); }}},
      MIXLM_STRING_FIELD(manifest),
      MIXLM_STRING_FIELD(out_dir),
      MIXLM_STRING_FIELD(output),
      MIXLM_STRING_FIELD(trace),
      MIXLM_INT_FIELD(vocab_size),
      MIXLM_INT_FIELD(max_order),
      {"skips",
       {[](RunConfig& c, const std::string& v) {
          std::vector<int> skips;
          for (const auto& s : SplitCommas(v)) skips.push_back(ToInt("skips", s));
          c.skips = std::move(skips);
        },
        [](const RunConfig& c) { return Join(c.skips); }}},
      MIXLM_INT_FIELD(classes),
      MIXLM_INT_FIELD(order),
      MIXLM_INT_FIELD(iterations),
      {"seed",
       {[](RunConfig& c, const std::string& v) {
          try {
            c.seed = internal::ParseUnsigned(v);
          } catch (const IoError&) {
            throw ParameterError("seed: expected an unsigned integer, got \"" + v + "\"");
          }
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      MIXLM_INT_FIELD(restarts),
      MIXLM_BOOL_FIELD(identity_init),
      MIXLM_INT_FIELD(truncate),
      MIXLM_INT_FIELD(truncate_max),
      MIXLM_INT_FIELD(gt_threshold),
      {"valid_frac",
       {[](RunConfig& c, const std::string& v) {
          try {
            c.valid_frac = internal::ParseDouble(v);
          } catch (const IoError&) {
            throw ParameterError("valid_frac: expected a number, got \"" + v + "\"");
          }
        },
        [](const RunConfig& c) { return internal::FormatDouble(c.valid_frac); }}},
      MIXLM_BOOL_FIELD(trigram),
      MIXLM_BOOL_FIELD(tie_rows),
      MIXLM_STRING_FIELD(unseen),
      MIXLM_INT_FIELD(top_n),
      MIXLM_INT_FIELD(list_size),
      MIXLM_INT_FIELD(workers),
  };
  return fields;
}

#undef MIXLM_STRING_FIELD
#undef MIXLM_INT_FIELD
#undef MIXLM_BOOL_FIELD

void Require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

bool OneOf(const std::string& value, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(),
                     [&](const char* o) { return value == o; });
}

}  // namespace

void RunConfig::Set(const std::string& key, const std::string& value) {
  if (value.find('\n') != std::string::npos) {
    throw ParameterError(key + ": value contains a newline");
  }
  for (const auto& [name, field] : Fields()) {
    if (name == key) {
      field.set(*this, value);
      return;
    }
  }
  throw ParameterError("unknown config key \"" + key + "\"");
}

RunConfig RunConfig::FromText(std::istream& in) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    config.Set(Trim(trimmed.substr(0, eq)), Trim(trimmed.substr(eq + 1)));
  }
  return config;
}

RunConfig RunConfig::FromFile(const std::string& path) {
  auto in = internal::OpenInput(path);
  return FromText(in);
}

void RunConfig::WriteText(std::ostream& out) const {
  for (const auto& [name, field] : Fields()) out << name << " = " << field.get(*this) << '\n';
}

void RunConfig::Validate() const {
  Require(subcommand.empty() ||
              OneOf(subcommand, {"prepare", "train-aggregate", "train-mixed", "smooth", "eval",
                                 "sweep-truncate", "report-classes", "report-lambda"}),
          "unknown subcommand \"" + subcommand + "\"");
  Require(OneOf(model_type, {"auto", "uniform", "unigram", "bigram", "aggregate", "mixed",
                             "cascade", "katz-baseline"}),
          "model_type must be auto, uniform, unigram, bigram, aggregate, mixed, cascade or "
          "katz-baseline");
  Require(vocab_size >= 4 && vocab_size <= kMaxVocabSize,
          "vocab_size must be in [4, " + std::to_string(kMaxVocabSize) + "]");
  Require(max_order >= 1 && max_order <= 3, "max_order must be 1, 2 or 3");
  for (const auto& path : mixed) Require(!path.empty(), "mixed model paths must be nonempty");
  for (int k : skips) Require(k >= 1 && k <= 64, "skips must lie in [1, 64]");
  Require(classes >= 1, "classes must be >= 1");
  Require(order >= 1 && order <= kMaxMixedOrder,
          "order must be in [1, " + std::to_string(kMaxMixedOrder) + "]");
  Require(iterations >= 0, "iterations must be >= 0");
  Require(restarts >= 1, "restarts must be >= 1");
  Require(truncate >= 1, "truncate must be >= 1");
  Require(truncate_max >= truncate, "truncate_max must be >= truncate");
  Require(gt_threshold >= 1, "gt_threshold must be >= 1");
  Require(valid_frac >= 0.0 && valid_frac < 1.0, "valid_frac must be in [0, 1)");
  Require(OneOf(unseen, {"none", "bigram", "trigram"}), "unseen must be none, bigram or trigram");
  Require(top_n >= 1, "top_n must be >= 1");
  Require(list_size >= 1, "list_size must be >= 1");
  Require(workers >= 0, "workers must be >= 0");
}

}  // namespace mixlm
