//
// Copyright 2026 The fairga Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Domain types shared by every fairga module: feature schemas, samples,
// explanations, GA individuals and verified discriminatory records.

#ifndef FAIRGA_CORE_HPP_
#define FAIRGA_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace fairga {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidSchema,
  kMalformedRow,
  kUnknownCategory,
  kOutOfRange,
  kEmptyCorpus,
  kDiverged,
  kAdapterDown,
  kProtocolViolation,
  kSingularFit,
  kNotInExplanation,
  kMalformedTriple,
  kNoPairAvailable,
  kOovWord,
  kNoSensitiveFeature,
  kEmptySeedSet,
  kNotEnoughRecords,
  kIo,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidSchema: return "InvalidSchema";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kAdapterDown: return "AdapterDown";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kSingularFit: return "SingularFit";
    case ErrorCode::kNotInExplanation: return "NotInExplanation";
    case ErrorCode::kMalformedTriple: return "MalformedTriple";
    case ErrorCode::kNoPairAvailable: return "NoPairAvailable";
    case ErrorCode::kOovWord: return "OovWord";
    case ErrorCode::kNoSensitiveFeature: return "NoSensitiveFeature";
    case ErrorCode::kEmptySeedSet: return "EmptySeedSet";
    case ErrorCode::kNotEnoughRecords: return "NotEnoughRecords";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// All fallible fairga operations throw Error; code() identifies the failure
// class and what() carries the detail (feature names, line numbers, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Feature space
// ---------------------------------------------------------------------------

struct Categorical {
  std::vector<std::string> domain;
};

// Integer grid [min, max] with the given step, in feature units.
struct Numeric {
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::int64_t step = 1;

  std::int64_t GridSize() const { return (max - min) / step + 1; }
};

// Marks the single variable-length token sequence of a text schema.
struct Token {};

using FeatureKind = std::variant<Categorical, Numeric, Token>;

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
  std::optional<std::string> relates_to;

  bool IsCategorical() const { return std::holds_alternative<Categorical>(kind); }
  bool IsNumeric() const { return std::holds_alternative<Numeric>(kind); }
  bool IsToken() const { return std::holds_alternative<Token>(kind); }
};

// Description of A = A1 x ... x An plus the protected attribute set P.
// A text schema has exactly one Token feature standing for every word slot.
struct FeatureSchema {
  std::vector<FeatureSpec> features;
  std::vector<std::string> label_names;
  std::set<std::string> protected_attrs;
  // Per protected attribute, the two value markers used to build
  // counterpart phrases ("male master" / "female master").
  std::map<std::string, std::pair<std::string, std::string>> markers;

  bool IsText() const { return features.size() == 1 && features[0].IsToken(); }

  std::optional<std::size_t> FeatureIndex(std::string_view name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> LabelIndex(std::string_view name) const {
    for (std::size_t i = 0; i < label_names.size(); ++i) {
      if (label_names[i] == name) return i;
    }
    return std::nullopt;
  }

  // Throws kInvalidSchema when a structural invariant fails.
  void Validate() const {
    if (label_names.size() < 2) {
      throw Error(ErrorCode::kInvalidSchema, "at least two labels are required");
    }
    std::set<std::string> labels(label_names.begin(), label_names.end());
    if (labels.size() != label_names.size()) {
      throw Error(ErrorCode::kInvalidSchema, "label names must be unique");
    }
    if (features.empty()) {
      throw Error(ErrorCode::kInvalidSchema, "schema has no features");
    }
    std::set<std::string> names;
    for (const auto& f : features) {
      if (!names.insert(f.name).second) {
        throw Error(ErrorCode::kInvalidSchema, "duplicate feature name '" + f.name + "'");
      }
      if (const auto* c = std::get_if<Categorical>(&f.kind)) {
        if (c->domain.empty()) {
          throw Error(ErrorCode::kInvalidSchema, "feature '" + f.name + "' has an empty domain");
        }
        std::set<std::string> values(c->domain.begin(), c->domain.end());
        if (values.size() != c->domain.size()) {
          throw Error(ErrorCode::kInvalidSchema,
                      "feature '" + f.name + "' has duplicate domain values");
        }
      } else if (const auto* n = std::get_if<Numeric>(&f.kind)) {
        if (n->min > n->max || n->step <= 0) {
          throw Error(ErrorCode::kInvalidSchema,
                      "feature '" + f.name + "' needs min <= max and step > 0");
        }
      } else if (features.size() != 1) {
        throw Error(ErrorCode::kInvalidSchema, "a token feature must be the only feature");
      }
    }
    if (IsText()) return;  // protected words are resolved through the knowledge graph
    for (const auto& p : protected_attrs) {
      bool referenced = std::any_of(features.begin(), features.end(), [&](const FeatureSpec& f) {
        return f.relates_to && *f.relates_to == p;
      });
      if (!referenced) {
        throw Error(ErrorCode::kInvalidSchema,
                    "protected attribute '" + p + "' is not related to any feature");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

struct CategoryRef {
  std::size_t index = 0;
  friend auto operator<=>(const CategoryRef&, const CategoryRef&) = default;
};

struct NumericValue {
  std::int64_t value = 0;
  friend auto operator<=>(const NumericValue&, const NumericValue&) = default;
};

struct TokenWord {
  std::string text;
  friend auto operator<=>(const TokenWord&, const TokenWord&) = default;
};

using Value = std::variant<CategoryRef, NumericValue, TokenWord>;

enum class Origin { kOriginal, kSeed, kGenerated };

struct Sample {
  std::vector<Value> values;
  Origin origin = Origin::kOriginal;
  std::optional<std::size_t> seed_id;

  std::size_t size() const { return values.size(); }
  const Value& operator[](std::size_t i) const { return values[i]; }

  // Identity is the value vector; provenance does not participate.
  friend bool operator==(const Sample& a, const Sample& b) { return a.values == b.values; }

  Sample With(std::size_t position, Value v) const {
    Sample out = *this;
    out.values.at(position) = std::move(v);
    return out;
  }
};

// Human-readable form of one value ("male", "36", "actor").
inline std::string FormatValue(const Value& v, const FeatureSpec& spec) {
  if (const auto* c = std::get_if<CategoryRef>(&v)) {
    return std::get<Categorical>(spec.kind).domain.at(c->index);
  }
  if (const auto* n = std::get_if<NumericValue>(&v)) return std::to_string(n->value);
  return std::get<TokenWord>(v).text;
}

inline const FeatureSpec& SpecAt(const FeatureSchema& schema, std::size_t position) {
  return schema.IsText() ? schema.features[0] : schema.features.at(position);
}

inline bool ValueValid(const Value& v, const FeatureSpec& spec) {
  return std::visit(
      [&](const auto& value) -> bool {
        using T = std::decay_t<decltype(value)>;
        if constexpr (std::is_same_v<T, CategoryRef>) {
          const auto* c = std::get_if<Categorical>(&spec.kind);
          return c != nullptr && value.index < c->domain.size();
        } else if constexpr (std::is_same_v<T, NumericValue>) {
          const auto* n = std::get_if<Numeric>(&spec.kind);
          return n != nullptr && value.value >= n->min && value.value <= n->max;
        } else {
          return spec.IsToken() && !value.text.empty();
        }
      },
      v);
}

inline bool SampleValid(const Sample& s, const FeatureSchema& schema) {
  if (!schema.IsText() && s.size() != schema.features.size()) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!ValueValid(s[i], SpecAt(schema, i))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Explanations
// ---------------------------------------------------------------------------

struct ExplanationEntry {
  std::size_t index = 0;
  double score = 0.0;
};

// Importance-ordered feature/token positions: descending |score|, ties by
// ascending index, so entries[0] has rank 1.
class Explanation {
 public:
  Explanation() = default;

  static Explanation FromScores(std::span<const double> scores) {
    Explanation e;
    e.entries_.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) e.entries_.push_back({i, scores[i]});
    e.Sort();
    return e;
  }

  static Explanation FromEntries(std::vector<ExplanationEntry> entries) {
    Explanation e;
    e.entries_ = std::move(entries);
    std::set<std::size_t> seen;
    for (const auto& entry : e.entries_) {
      if (!seen.insert(entry.index).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate explanation index");
      }
    }
    e.Sort();
    return e;
  }

  const std::vector<ExplanationEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::optional<double> ScoreOf(std::size_t index) const {
    for (const auto& entry : entries_) {
      if (entry.index == index) return entry.score;
    }
    return std::nullopt;
  }

 private:
  void Sort() {
    std::sort(entries_.begin(), entries_.end(),
              [](const ExplanationEntry& a, const ExplanationEntry& b) {
                const double fa = std::fabs(a.score);
                const double fb = std::fabs(b.score);
                if (fa != fb) return fa > fb;
                return a.index < b.index;
              });
  }

  std::vector<ExplanationEntry> entries_;
};

// ---------------------------------------------------------------------------
// GA state
// ---------------------------------------------------------------------------

struct Individual {
  Sample sample;
  std::optional<double> fitness;
  // Target-label probabilities of the two protected variants behind fitness.
  std::optional<std::pair<double, double>> pair_witness;
  // Sensitive position the fitness is computed on.
  std::size_t focus = 0;

  void Invalidate() {
    fitness.reset();
    pair_witness.reset();
  }
};

struct Population {
  std::vector<Individual> members;
  std::size_t generation = 0;
  // Set for text populations, which are built from a single seed.
  std::optional<std::size_t> seed_id;

  std::size_t size() const { return members.size(); }
};

struct DiscriminatoryRecord {
  Sample sample;
  std::size_t sensitive_index = 0;
  Sample variant_a;
  Sample variant_b;
  std::string label_a;
  std::string label_b;
  std::string dedupe_key;
};

// Raw counters of one run; the ratios are always derived, never stored.
struct RunMetrics {
  std::size_t tsn = 0;
  std::size_t dsn = 0;
  double elapsed = 0.0;

  std::optional<double> dss() const {
    if (dsn == 0) return std::nullopt;
    return elapsed / static_cast<double>(dsn);
  }
  double sur() const {
    return tsn == 0 ? 0.0 : static_cast<double>(dsn) / static_cast<double>(tsn);
  }
};

// ---------------------------------------------------------------------------
// Dedupe key
// ---------------------------------------------------------------------------

namespace detail {

inline void AppendEscaped(std::string& out, std::string_view text) {
  for (char c : text) {
    if (c == '|' || c == '\\' || c == '*') out.push_back('\\');
    out.push_back(c);
  }
}

}  // namespace detail

// Canonical serialization of `sample` with every protected-related position
// replaced by '*'. Two samples share a key iff they agree on all other
// positions.
inline std::string DedupeKey(const Sample& sample, const FeatureSchema& schema,
                             const std::set<std::size_t>& protected_positions) {
  std::string key;
  key.reserve(sample.size() * 4);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (i > 0) key.push_back('|');
    if (protected_positions.count(i) != 0) {
      key.push_back('*');
      continue;
    }
    detail::AppendEscaped(key, FormatValue(sample[i], SpecAt(schema, i)));
  }
  return key;
}

}  // namespace fairga

#endif  // FAIRGA_CORE_HPP_
