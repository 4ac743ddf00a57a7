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

// Dataset ingestion: schema config files, tabular CSV, text corpora, and the
// one-hot / min-max encoding consumed by the built-in models.

#ifndef FAIRGA_DATA_HPP_
#define FAIRGA_DATA_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/rng.hpp"
#include "json.hpp"

namespace fairga {

inline constexpr std::string_view kLabelColumn = "__label__";

struct Dataset {
  FeatureSchema schema;
  std::vector<Sample> samples;
  // Label indices into schema.label_names; empty for unlabeled data.
  std::vector<std::size_t> labels;

  std::size_t size() const { return samples.size(); }
  bool HasLabels() const { return !samples.empty() && labels.size() == samples.size(); }
};

// ---------------------------------------------------------------------------
// Schema config (JSON)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json SchemaToJson(const FeatureSchema& schema) {
  nlohmann::ordered_json j;
  j["features"] = nlohmann::ordered_json::array();
  for (const auto& f : schema.features) {
    nlohmann::ordered_json fj;
    fj["name"] = f.name;
    if (const auto* c = std::get_if<Categorical>(&f.kind)) {
      fj["kind"] = "categorical";
      fj["domain"] = c->domain;
    } else if (const auto* n = std::get_if<Numeric>(&f.kind)) {
      fj["kind"] = "numeric";
      fj["min"] = n->min;
      fj["max"] = n->max;
      fj["step"] = n->step;
    } else {
      fj["kind"] = "token";
    }
    if (f.relates_to) fj["relates_to"] = *f.relates_to;
    j["features"].push_back(std::move(fj));
  }
  j["labels"] = schema.label_names;
  j["protected"] = std::vector<std::string>(schema.protected_attrs.begin(),
                                            schema.protected_attrs.end());
  if (!schema.markers.empty()) {
    nlohmann::ordered_json mj = nlohmann::ordered_json::object();
    for (const auto& [attr, pair] : schema.markers) mj[attr] = {pair.first, pair.second};
    j["markers"] = std::move(mj);
  }
  return j;
}

template <typename Json>
FeatureSchema SchemaFromJson(const Json& j) {
  FeatureSchema schema;
  try {
    for (const auto& fj : j.at("features")) {
      FeatureSpec spec;
      spec.name = fj.at("name").template get<std::string>();
      const auto kind = fj.at("kind").template get<std::string>();
      if (kind == "categorical") {
        spec.kind = Categorical{fj.at("domain").template get<std::vector<std::string>>()};
      } else if (kind == "numeric") {
        Numeric n;
        n.min = fj.at("min").template get<std::int64_t>();
        n.max = fj.at("max").template get<std::int64_t>();
        n.step = fj.contains("step") ? fj.at("step").template get<std::int64_t>() : 1;
        spec.kind = n;
      } else if (kind == "token") {
        spec.kind = Token{};
      } else {
        throw Error(ErrorCode::kInvalidSchema, "unknown feature kind '" + kind + "'");
      }
      if (fj.contains("relates_to") && !fj.at("relates_to").is_null()) {
        spec.relates_to = fj.at("relates_to").template get<std::string>();
      }
      schema.features.push_back(std::move(spec));
    }
    schema.label_names = j.at("labels").template get<std::vector<std::string>>();
    if (j.contains("protected")) {
      for (const auto& p : j.at("protected")) schema.protected_attrs.insert(p.template get<std::string>());
    }
    if (j.contains("markers")) {
      for (auto it = j.at("markers").begin(); it != j.at("markers").end(); ++it) {
        const auto values = it.value().template get<std::vector<std::string>>();
        if (values.size() != 2 || values[0] == values[1]) {
          throw Error(ErrorCode::kInvalidSchema,
                      "markers for '" + it.key() + "' must be two distinct words");
        }
        schema.markers[it.key()] = {values[0], values[1]};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSchema, e.what());
  }
  schema.Validate();
  return schema;
}

inline FeatureSchema LoadSchema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSchema, path.string() + ": " + e.what());
  }
  return SchemaFromJson(j);
}

inline void SaveSchema(const FeatureSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << SchemaToJson(schema).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Parses one tabular cell against its feature. Errors name the feature.
inline Value ParseValue(std::string_view text, const FeatureSpec& spec) {
  if (const auto* c = std::get_if<Categorical>(&spec.kind)) {
    auto it = std::find(c->domain.begin(), c->domain.end(), text);
    if (it == c->domain.end()) {
      throw Error(ErrorCode::kUnknownCategory,
                  "feature '" + spec.name + "' has no value '" + std::string(text) + "'");
    }
    return CategoryRef{static_cast<std::size_t>(it - c->domain.begin())};
  }
  if (const auto* n = std::get_if<Numeric>(&spec.kind)) {
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      throw Error(ErrorCode::kMalformedRow,
                  "feature '" + spec.name + "' expects an integer, got '" + std::string(text) + "'");
    }
    if (v < n->min || v > n->max) {
      throw Error(ErrorCode::kOutOfRange,
                  "feature '" + spec.name + "' value " + std::string(text) + " outside [" +
                      std::to_string(n->min) + ", " + std::to_string(n->max) + "]");
    }
    return NumericValue{v};
  }
  if (text.empty()) throw Error(ErrorCode::kMalformedRow, "empty token");
  return TokenWord{std::string(text)};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
// quotes but not newlines.
inline std::vector<std::string> SplitCsvLine(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(Trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(was_quoted ? field : std::string(Trim(field)));
  return fields;
}

inline std::string QuoteCsv(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos &&
      Trim(field).size() == field.size()) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

inline Dataset LoadTabular(const std::filesystem::path& csv_path, const FeatureSchema& schema) {
  if (schema.IsText()) throw Error(ErrorCode::kInvalidArgument, "LoadTabular needs a tabular schema");
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + csv_path.string());

  Dataset ds;
  ds.schema = schema;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedRow, "line 1: missing header row");
  }
  const auto header = detail::SplitCsvLine(detail::StripCr(line), 1);
  const std::size_t n = schema.features.size();
  bool has_label = false;
  if (header.size() == n + 1 && header.back() == kLabelColumn) {
    has_label = true;
  } else if (header.size() != n) {
    throw Error(ErrorCode::kMalformedRow, "line 1: header has " + std::to_string(header.size()) +
                                              " columns, schema has " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (header[i] != schema.features[i].name) {
      throw Error(ErrorCode::kMalformedRow, "line 1: column " + std::to_string(i + 1) + " is '" +
                                                header[i] + "', expected '" +
                                                schema.features[i].name + "'");
    }
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::StripCr(std::move(line));
    if (Trim(line).empty()) continue;
    const auto cells = detail::SplitCsvLine(line, line_no);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(header.size()) + " fields, got " +
                                                std::to_string(cells.size()));
    }
    Sample s;
    s.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (cells[i] == "?" || cells[i].empty()) {
        throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) +
                                                  ": missing value for '" +
                                                  schema.features[i].name + "'");
      }
      try {
        s.values.push_back(ParseValue(cells[i], schema.features[i]));
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (has_label) {
      auto label = schema.LabelIndex(cells.back());
      if (!label) {
        throw Error(ErrorCode::kUnknownCategory, "line " + std::to_string(line_no) + ": feature '" +
                                                     std::string(kLabelColumn) + "' has no value '" +
                                                     cells.back() + "'");
      }
      ds.labels.push_back(*label);
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

inline void SaveTabular(const Dataset& ds, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + csv_path.string());
  const auto& features = ds.schema.features;
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << (i ? "," : "") << detail::QuoteCsv(features[i].name);
  }
  const bool labeled = ds.HasLabels();
  if (labeled) out << ',' << kLabelColumn;
  out << '\n';
  for (std::size_t r = 0; r < ds.samples.size(); ++r) {
    const auto& s = ds.samples[r];
    for (std::size_t i = 0; i < features.size(); ++i) {
      out << (i ? "," : "") << detail::QuoteCsv(FormatValue(s[i], features[i]));
    }
    if (labeled) out << ',' << detail::QuoteCsv(ds.schema.label_names.at(ds.labels[r]));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

// Lowercase, split on whitespace, strip leading/trailing punctuation, drop
// tokens that end up empty.
inline std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string tok(text.substr(b, e - b));
      for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

inline FeatureSchema TextSchema(std::vector<std::string> labels, std::set<std::string> protected_attrs = {}) {
  FeatureSchema schema;
  schema.features.push_back({"text", Token{}, std::nullopt});
  schema.label_names = std::move(labels);
  schema.protected_attrs = std::move(protected_attrs);
  return schema;
}

// One document per line ("text<TAB>label"), or one document per file when
// `path` is a directory (files visited in name order). Labels resolve by
// name against the schema, falling back to an integer index.
inline Dataset LoadText(const std::filesystem::path& path, const FeatureSchema& schema) {
  if (!schema.IsText()) throw Error(ErrorCode::kInvalidArgument, "LoadText needs a text schema");
  Dataset ds;
  ds.schema = schema;
  std::vector<std::string> docs;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f);
      std::stringstream buf;
      buf << in.rdbuf();
      std::string doc = buf.str();
      while (!doc.empty() && (doc.back() == '\n' || doc.back() == '\r')) doc.pop_back();
      docs.push_back(std::move(doc));
    }
  } else {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) docs.push_back(detail::StripCr(std::move(line)));
  }

  bool any_label = false;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::string_view doc = docs[d];
    std::optional<std::size_t> label;
    if (auto tab = doc.rfind('\t'); tab != std::string_view::npos) {
      const auto label_text = Trim(doc.substr(tab + 1));
      doc = doc.substr(0, tab);
      label = schema.LabelIndex(label_text);
      if (!label) {
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), idx);
        if (ec != std::errc() || ptr != label_text.data() + label_text.size() ||
            idx >= schema.label_names.size()) {
          throw Error(ErrorCode::kUnknownCategory,
                      "document " + std::to_string(d + 1) + ": unknown label '" + std::string(label_text) + "'");
        }
        label = idx;
      }
    }
    const auto tokens = Tokenize(doc);
    if (tokens.empty()) continue;
    Sample s;
    for (const auto& t : tokens) s.values.push_back(TokenWord{t});
    ds.samples.push_back(std::move(s));
    if (label) {
      any_label = true;
      ds.labels.push_back(*label);
    } else if (any_label) {
      throw Error(ErrorCode::kMalformedRow, "document " + std::to_string(d + 1) + ": missing label");
    }
  }
  if (ds.samples.empty()) throw Error(ErrorCode::kEmptyCorpus, path.string() + " has no documents");
  if (any_label && ds.labels.size() != ds.samples.size()) {
    throw Error(ErrorCode::kMalformedRow, "some documents lack labels");
  }
  return ds;
}

inline Dataset LoadDataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  return schema.IsText() ? LoadText(path, schema) : LoadTabular(path, schema);
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

inline std::size_t EncodedDimension(const FeatureSchema& schema) {
  std::size_t d = 0;
  for (const auto& f : schema.features) {
    if (const auto* c = std::get_if<Categorical>(&f.kind)) {
      d += c->domain.size();
    } else if (f.IsNumeric()) {
      d += 1;
    }
  }
  return d;
}

// Categorical -> one-hot block; numeric -> (v - min) / (max - min).
inline void EncodeInto(const Sample& sample, const FeatureSchema& schema, std::span<double> out) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    const auto& f = schema.features[i];
    if (const auto* c = std::get_if<Categorical>(&f.kind)) {
      std::fill(out.begin() + offset, out.begin() + offset + c->domain.size(), 0.0);
      out[offset + std::get<CategoryRef>(sample[i]).index] = 1.0;
      offset += c->domain.size();
    } else if (const auto* n = std::get_if<Numeric>(&f.kind)) {
      const double v = static_cast<double>(std::get<NumericValue>(sample[i]).value);
      out[offset++] = n->max == n->min ? 0.0 : (v - n->min) / static_cast<double>(n->max - n->min);
    }
  }
}

inline std::vector<double> Encode(const Sample& sample, const FeatureSchema& schema) {
  std::vector<double> out(EncodedDimension(schema));
  EncodeInto(sample, schema, out);
  return out;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Per-label shuffle, then the first round(test_fraction * n_label) rows of
// each label go to the test set. Row order inside each part follows the
// original dataset order.
inline TrainTestSplit StratifiedSplit(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!ds.HasLabels()) throw Error(ErrorCode::kInvalidArgument, "stratified split needs labels");
  Rng rng(seed);
  std::vector<bool> in_test(ds.size(), false);
  for (std::size_t label = 0; label < ds.schema.label_names.size(); ++label) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == label) rows.push_back(i);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    for (std::size_t k = 0; k < n_test && k < rows.size(); ++k) in_test[rows[k]] = true;
  }
  TrainTestSplit split{{ds.schema, {}, {}}, {ds.schema, {}, {}}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto& part = in_test[i] ? split.test : split.train;
    part.samples.push_back(ds.samples[i]);
    part.labels.push_back(ds.labels[i]);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Discrete feature space
// ---------------------------------------------------------------------------

// Number of grid points of one tabular feature.
inline std::size_t Cardinality(const FeatureSpec& spec) {
  if (const auto* c = std::get_if<Categorical>(&spec.kind)) return c->domain.size();
  if (const auto* n = std::get_if<Numeric>(&spec.kind)) return static_cast<std::size_t>(n->GridSize());
  throw Error(ErrorCode::kInvalidArgument, "token features have no finite domain");
}

// Value at grid position `k` of one tabular feature.
inline Value GridValue(const FeatureSpec& spec, std::size_t k) {
  if (spec.IsCategorical()) return CategoryRef{k};
  const auto& n = std::get<Numeric>(spec.kind);
  return NumericValue{n.min + static_cast<std::int64_t>(k) * n.step};
}

// Grid position of a value; off-grid numerics round down to the grid.
inline std::size_t GridPosition(const FeatureSpec& spec, const Value& v) {
  if (spec.IsCategorical()) return std::get<CategoryRef>(v).index;
  const auto& n = std::get<Numeric>(spec.kind);
  return static_cast<std::size_t>((std::get<NumericValue>(v).value - n.min) / n.step);
}

// |A1 x ... x An| for a tabular schema, saturating at SIZE_MAX.
inline std::size_t SpaceSize(const FeatureSchema& schema) {
  std::size_t total = 1;
  for (const auto& f : schema.features) {
    const std::size_t c = Cardinality(f);
    if (c != 0 && total > std::numeric_limits<std::size_t>::max() / c) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= c;
  }
  return total;
}

// Mixed-radix decoding, last feature varying fastest.
inline Sample PointAt(const FeatureSchema& schema, std::size_t index) {
  Sample s;
  s.values.resize(schema.features.size());
  for (std::size_t i = schema.features.size(); i-- > 0;) {
    const std::size_t c = Cardinality(schema.features[i]);
    s.values[i] = GridValue(schema.features[i], index % c);
    index /= c;
  }
  return s;
}

inline std::size_t IndexOf(const FeatureSchema& schema, const Sample& s) {
  std::size_t index = 0;
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    index = index * Cardinality(schema.features[i]) + GridPosition(schema.features[i], s[i]);
  }
  return index;
}

inline Value RandomValue(const FeatureSpec& spec, Rng& rng) {
  return GridValue(spec, UniformIndex(rng, Cardinality(spec)));
}

inline Sample RandomSample(const FeatureSchema& schema, Rng& rng) {
  Sample s;
  s.origin = Origin::kGenerated;
  s.values.reserve(schema.features.size());
  for (const auto& f : schema.features) s.values.push_back(RandomValue(f, rng));
  return s;
}

}  // namespace fairga

#endif  // FAIRGA_DATA_HPP_
