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

// records.csv: one discriminatory record per row.
//
// Tabular columns: one per feature, then sensitive_index, value_a, value_b,
// label_a, label_b, dedupe_key. Text records hold the token list as a JSON
// array in a single "tokens" column.

#ifndef FAIRGA_RECORDS_HPP_
#define FAIRGA_RECORDS_HPP_

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/model.hpp"
#include "json.hpp"

namespace fairga {

inline constexpr const char* kRecordTailColumns[] = {"sensitive_index", "value_a", "value_b",
                                                     "label_a",         "label_b", "dedupe_key"};

inline std::vector<std::string> RecordHeader(const FeatureSchema& schema) {
  std::vector<std::string> header;
  if (schema.IsText()) {
    header.push_back("tokens");
  } else {
    for (const auto& f : schema.features) header.push_back(f.name);
  }
  for (const char* c : kRecordTailColumns) header.push_back(c);
  return header;
}

inline void WriteRecords(const std::vector<DiscriminatoryRecord>& records, const FeatureSchema& schema,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const auto header = RecordHeader(schema);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << detail::QuoteCsv(header[i]);
  out << '\n';
  for (const auto& r : records) {
    std::vector<std::string> row;
    if (schema.IsText()) {
      auto tokens = nlohmann::ordered_json::array();
      for (const auto& v : r.sample.values) tokens.push_back(std::get<TokenWord>(v).text);
      row.push_back(tokens.dump());
    } else {
      for (std::size_t i = 0; i < r.sample.size(); ++i) row.push_back(FormatValue(r.sample[i], schema.features[i]));
    }
    const auto& spec = SpecAt(schema, r.sensitive_index);
    row.push_back(std::to_string(r.sensitive_index));
    row.push_back(FormatValue(r.variant_a[r.sensitive_index], spec));
    row.push_back(FormatValue(r.variant_b[r.sensitive_index], spec));
    row.push_back(r.label_a);
    row.push_back(r.label_b);
    row.push_back(r.dedupe_key);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::QuoteCsv(row[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

inline std::vector<DiscriminatoryRecord> ReadRecords(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedRow, path.string() + ": missing header");
  const auto expected = RecordHeader(schema);
  if (detail::SplitCsvLine(detail::StripCr(line), 1) != expected) {
    throw Error(ErrorCode::kInvalidSchema, path.string() + ": header does not match the schema");
  }
  std::vector<DiscriminatoryRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::StripCr(std::move(line));
    if (line.empty()) continue;
    const auto fields = detail::SplitCsvLine(line, line_no);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != expected.size()) throw Error(ErrorCode::kMalformedRow, where + "wrong column count");
    DiscriminatoryRecord r;
    std::size_t col = 0;
    try {
      if (schema.IsText()) {
        for (const auto& t : nlohmann::json::parse(fields[col++])) r.sample.values.push_back(TokenWord{t.get<std::string>()});
      } else {
        for (const auto& f : schema.features) r.sample.values.push_back(ParseValue(fields[col++], f));
      }
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kMalformedRow, where + "bad token list");
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
    const auto& idx_text = fields[col++];
    auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), r.sensitive_index);
    if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || r.sensitive_index >= r.sample.size()) {
      throw Error(ErrorCode::kMalformedRow, where + "bad sensitive_index '" + idx_text + "'");
    }
    const auto& spec = SpecAt(schema, r.sensitive_index);
    try {
      r.variant_a = r.sample.With(r.sensitive_index, ParseValue(fields[col++], spec));
      r.variant_b = r.sample.With(r.sensitive_index, ParseValue(fields[col++], spec));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
    r.label_a = fields[col++];
    r.label_b = fields[col++];
    r.dedupe_key = fields[col++];
    records.push_back(std::move(r));
  }
  return records;
}

// Re-checks a record with nothing but the model: the variants differ from
// the sample only at the sensitive index, differ from each other there, and
// f assigns them the recorded, different labels. For tabular schemas the
// index must also relate to a protected attribute.
inline bool RecheckRecord(const DiscriminatoryRecord& r, const Predictor& f, const FeatureSchema& schema) {
  const std::size_t n = r.sample.size();
  if (r.sensitive_index >= n || r.variant_a.size() != n || r.variant_b.size() != n) return false;
  if (!schema.IsText()) {
    const auto& rel = schema.features[r.sensitive_index].relates_to;
    if (!rel || schema.protected_attrs.count(*rel) == 0) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i == r.sensitive_index) continue;
    if (r.variant_a[i] != r.sample[i] || r.variant_b[i] != r.sample[i]) return false;
  }
  if (r.variant_a[r.sensitive_index] == r.variant_b[r.sensitive_index]) return false;
  const auto la = f.PredictLabel(r.variant_a);
  const auto lb = f.PredictLabel(r.variant_b);
  return la != lb && f.labels()[la] == r.label_a && f.labels()[lb] == r.label_b;
}

struct RecheckSummary {
  std::size_t total = 0;
  std::size_t verified = 0;
  std::vector<std::size_t> failed;  // record indices

  bool all_verified() const { return verified == total; }
};

inline RecheckSummary RecheckRecords(const std::vector<DiscriminatoryRecord>& records, const Predictor& f,
                                     const FeatureSchema& schema) {
  RecheckSummary s;
  s.total = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (RecheckRecord(records[i], f, schema)) {
      ++s.verified;
    } else {
      s.failed.push_back(i);
    }
  }
  return s;
}

}  // namespace fairga

#endif  // FAIRGA_RECORDS_HPP_
