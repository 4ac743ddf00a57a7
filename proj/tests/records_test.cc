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

#include "fairga/records.hpp"

#include "fairga/engine.hpp"
#include "fairga/synthetic.hpp"
#include "gtest/gtest.h"
#include "support/test_util.hpp"

namespace fairga {
namespace {

using ::fairga::testing::BinaryPredictor;
using ::fairga::testing::MakeSample;
using ::fairga::testing::TempDir;
using ::fairga::testing::ToySchema;

std::unique_ptr<LambdaPredictor> SexBiased(const FeatureSchema& schema) {
  return BinaryPredictor(schema, [](const Sample& x) { return std::get<CategoryRef>(x[0]).index == 1 ? 0.7 : 0.3; });
}

TEST(RecordsFileTest, TabularRoundTrip) {
  TempDir dir;
  const auto schema = ToySchema();
  const auto f = SexBiased(schema);
  SearchSpace space(schema, {"sex"});
  std::vector<DiscriminatoryRecord> records;
  for (int h : {3, 17, 40}) records.push_back(*FindDiscrimination(MakeSample({CategoryRef{1}, CategoryRef{2}, NumericValue{h}}), *f, space));
  WriteRecords(records, schema, dir / "r.csv");
  const auto back = ReadRecords(dir / "r.csv", schema);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].sample, records[i].sample);
    EXPECT_EQ(back[i].variant_a, records[i].variant_a);
    EXPECT_EQ(back[i].variant_b, records[i].variant_b);
    EXPECT_EQ(back[i].dedupe_key, records[i].dedupe_key);
    EXPECT_EQ(back[i].label_b, records[i].label_b);
  }
  const auto summary = RecheckRecords(back, *f, schema);
  EXPECT_TRUE(summary.all_verified());
  EXPECT_EQ(::fairga::testing::ReadFile(dir / "r.csv").substr(0, 62),
            "sex,job,hours,sensitive_index,value_a,value_b,label_a,label_b,");
}

TEST(RecordsFileTest, TextRoundTrip) {
  TempDir dir;
  const auto schema = TextSchema({"neg", "pos"}, {"gender"});
  DiscriminatoryRecord r;
  r.sample = MakeSample({TokenWord{"the"}, TokenWord{"actor"}, TokenWord{"\"quoted\","}});
  r.sensitive_index = 1;
  r.variant_a = r.sample;
  r.variant_b = r.sample.With(1, TokenWord{"actress"});
  r.label_a = "pos";
  r.label_b = "neg";
  r.dedupe_key = "the|*|x";
  WriteRecords({r}, schema, dir / "t.csv");
  const auto back = ReadRecords(dir / "t.csv", schema);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].sample, r.sample);
  EXPECT_EQ(back[0].variant_b, r.variant_b);
}

TEST(RecheckTest, DetectsTamperedRecords) {
  const auto schema = ToySchema();
  const auto f = SexBiased(schema);
  SearchSpace space(schema, {"sex"});
  const auto good = *FindDiscrimination(MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{5}}), *f, space);
  EXPECT_TRUE(RecheckRecord(good, *f, schema));

  auto swapped = good;
  std::swap(swapped.label_a, swapped.label_b);
  EXPECT_FALSE(RecheckRecord(swapped, *f, schema));

  auto other_position = good;
  other_position.variant_b = good.variant_b.With(2, NumericValue{6});
  EXPECT_FALSE(RecheckRecord(other_position, *f, schema));

  auto not_protected = good;
  not_protected.sensitive_index = 1;
  EXPECT_FALSE(RecheckRecord(not_protected, *f, schema));

  const auto blind = BinaryPredictor(schema, [](const Sample&) { return 0.6; });
  const auto summary = RecheckRecords({good, swapped}, *blind, schema);
  EXPECT_EQ(summary.verified, 0u);
  EXPECT_EQ(summary.failed.size(), 2u);
}

TEST(RecordsFileTest, RejectsMismatchedHeader) {
  TempDir dir;
  ::fairga::testing::WriteFile(dir / "r.csv", "a,b\n");
  EXPECT_THROW(ReadRecords(dir / "r.csv", ToySchema()), Error);
}

}  // namespace
}  // namespace fairga
