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

// Synthetic datasets and classifiers with known discrimination.
//
// Planted benchmark: sex x f1 x f2 x f3 (2 x 8 x 8 x 8 = 1024 points). Inside
// the region f1 in {a0, a1} the classifier follows sex
// (P(pos) = 0.5 +/- gap). Outside it follows a protected-blind rule t(x) with
// margin 0.35, plus a sex effect that decays with the distance to the region
// and never flips the label. Ground truth is t(x) everywhere.
//
// Census-like: twelve attributes shaped after the adult census extract with
// a label rule that leans on sex.

#ifndef FAIRGA_SYNTHETIC_HPP_
#define FAIRGA_SYNTHETIC_HPP_

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/model.hpp"
#include "fairga/rng.hpp"

namespace fairga {

struct PlantedConfig {
  // t(x) = +1 iff w1[f1] + f2 + w3[f3] > center.
  double center = 7.5;
  double region_gap = 0.3;
  double margin = 0.35;
  double leak = 0.1;
  // Sampling weight of points inside the region relative to points outside.
  double region_weight = 1.0;
};

inline constexpr std::array<int, 8> kPlantedW1 = {0, 1, 2, 3, 4, 5, 6, 7};
inline constexpr std::array<int, 8> kPlantedW3 = {3, 0, 6, 1, 7, 2, 5, 4};

inline FeatureSchema PlantedSchema() {
  FeatureSchema schema;
  schema.features.push_back({"sex", Categorical{{"female", "male"}}, "sex"});
  std::vector<std::string> d1;
  std::vector<std::string> d3;
  for (int i = 0; i < 8; ++i) {
    d1.push_back("a" + std::to_string(i));
    d3.push_back("b" + std::to_string(i));
  }
  schema.features.push_back({"f1", Categorical{d1}, std::nullopt});
  schema.features.push_back({"f2", Numeric{0, 7, 1}, std::nullopt});
  schema.features.push_back({"f3", Categorical{d3}, std::nullopt});
  schema.label_names = {"neg", "pos"};
  schema.protected_attrs = {"sex"};
  return schema;
}

// Distance (in f1 steps) from x to the biased region.
inline std::int64_t PlantedDistance(const Sample& x) {
  const auto f1 = static_cast<std::int64_t>(std::get<CategoryRef>(x[1]).index);
  return f1 <= 1 ? 0 : f1 - 1;
}

// Protected-blind ground truth: true for "pos".
inline bool PlantedTruth(const Sample& x, const PlantedConfig& config = {}) {
  const auto f1 = std::get<CategoryRef>(x[1]).index;
  const auto f2 = std::get<NumericValue>(x[2]).value;
  const auto f3 = std::get<CategoryRef>(x[3]).index;
  return static_cast<double>(kPlantedW1[f1] + f2 + kPlantedW3[f3]) > config.center;
}

inline std::vector<double> PlantedProba(const Sample& x, const PlantedConfig& config = {}) {
  const double s = std::get<CategoryRef>(x[0]).index == 1 ? 1.0 : -1.0;
  const auto d = PlantedDistance(x);
  double pos = 0.0;
  if (d == 0) {
    pos = 0.5 + config.region_gap * s;
  } else {
    const double t = PlantedTruth(x, config) ? 1.0 : -1.0;
    pos = 0.5 + config.margin * t + config.leak * s * std::exp(-static_cast<double>(d - 1));
  }
  return {1.0 - pos, pos};
}

inline std::unique_ptr<TableModel> PlantedModel(const PlantedConfig& config = {}) {
  return TableModel::FromFunction(PlantedSchema(), [config](const Sample& x) { return PlantedProba(x, config); });
}

enum class PlantedLabels {
  // Labels of the planted (biased) classifier.
  kBiased,
  // t(x), independent of sex.
  kBlind,
};

// n points drawn from the space, region points weighted by config.region_weight.
inline Dataset PlantedDataset(std::size_t n, std::uint64_t seed, PlantedLabels labels,
                              const PlantedConfig& config = {}) {
  Dataset ds;
  ds.schema = PlantedSchema();
  const std::size_t space = SpaceSize(ds.schema);
  std::vector<double> weights(space);
  for (std::size_t i = 0; i < space; ++i) {
    weights[i] = PlantedDistance(PointAt(ds.schema, i)) == 0 ? config.region_weight : 1.0;
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  Rng rng = MakeStream(seed, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s = PointAt(ds.schema, pick(rng));
    std::size_t label = 0;
    if (labels == PlantedLabels::kBiased) {
      const auto p = PlantedProba(s, config);
      label = p[1] > p[0] ? 1 : 0;
    } else {
      label = PlantedTruth(s, config) ? 1 : 0;
    }
    ds.samples.push_back(std::move(s));
    ds.labels.push_back(label);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Census-like data
// ---------------------------------------------------------------------------

inline FeatureSchema CensusSchema() {
  FeatureSchema schema;
  schema.features.push_back({"age", Numeric{17, 90, 1}, "age"});
  schema.features.push_back(
      {"workclass",
       Categorical{{"private", "self-emp", "federal-gov", "local-gov", "state-gov", "without-pay", "never-worked"}},
       std::nullopt});
  schema.features.push_back({"education_num", Numeric{1, 16, 1}, std::nullopt});
  schema.features.push_back({"marital_status",
                             Categorical{{"married", "divorced", "never-married", "separated", "widowed",
                                          "spouse-absent", "married-af"}},
                             std::nullopt});
  schema.features.push_back({"occupation",
                             Categorical{{"tech-support", "craft-repair", "other-service", "sales", "exec-managerial",
                                          "prof-specialty", "handlers-cleaners", "machine-op", "adm-clerical",
                                          "farming-fishing", "transport-moving", "priv-house-serv",
                                          "protective-serv", "armed-forces"}},
                             std::nullopt});
  schema.features.push_back(
      {"relationship", Categorical{{"wife", "own-child", "husband", "not-in-family", "other-relative", "unmarried"}},
       std::nullopt});
  schema.features.push_back(
      {"race", Categorical{{"white", "asian-pac-islander", "amer-indian-eskimo", "other", "black"}}, "race"});
  schema.features.push_back({"sex", Categorical{{"female", "male"}}, "sex"});
  schema.features.push_back({"capital_gain", Numeric{0, 19, 1}, std::nullopt});
  schema.features.push_back({"capital_loss", Numeric{0, 4, 1}, std::nullopt});
  schema.features.push_back({"hours_per_week", Numeric{1, 99, 1}, std::nullopt});
  schema.features.push_back({"native_country",
                             Categorical{{"united-states", "mexico", "philippines", "germany", "canada", "india",
                                          "england", "china", "cuba", "other"}},
                             std::nullopt});
  schema.label_names = {"<=50K", ">50K"};
  schema.protected_attrs = {"sex"};
  return schema;
}

inline constexpr std::array<double, 7> kCensusMarital = {0.9, -0.4, -1.0, -0.6, -0.5, -0.5, 0.8};
inline constexpr std::array<double, 14> kCensusOccupation = {0.3,  0.0, -0.8, 0.1, 0.9, 0.8, -0.7,
                                                             -0.4, -0.3, -0.6, -0.2, -1.0, 0.2, 0.0};

// Logit of P(>50K) in the generating rule.
inline double CensusLogit(const Sample& x) {
  auto num = [&](std::size_t i) { return static_cast<double>(std::get<NumericValue>(x[i]).value); };
  auto cat = [&](std::size_t i) { return std::get<CategoryRef>(x[i]).index; };
  double z = -1.6;
  z += 0.04 * (num(0) - 40.0);
  z += 0.3 * (num(2) - 10.0);
  z += kCensusMarital[cat(3)];
  z += kCensusOccupation[cat(4)];
  z += 0.03 * (num(10) - 40.0);
  z += 0.25 * num(8) - 0.2 * num(9);
  z += cat(7) == 1 ? 0.3 : -0.1;
  return z;
}

// Draws attributes from rough marginals; labels follow CensusLogit with
// logistic noise.
inline Dataset CensusDataset(std::size_t n, std::uint64_t seed) {
  Dataset ds;
  ds.schema = CensusSchema();
  Rng rng = MakeStream(seed, 0);
  std::normal_distribution<double> age_dist(38.0, 13.0);
  std::normal_distribution<double> edu_dist(10.0, 2.5);
  std::normal_distribution<double> hours_dist(40.0, 12.0);
  auto clamp_int = [](double v, std::int64_t lo, std::int64_t hi) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::lround(v)), lo, hi);
  };
  auto weighted = [&](std::initializer_list<double> w) {
    std::discrete_distribution<std::size_t> d(w);
    return d(rng);
  };
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.values.push_back(NumericValue{clamp_int(age_dist(rng), 17, 90)});
    s.values.push_back(CategoryRef{weighted({70, 11, 3, 6, 4, 1, 1})});
    s.values.push_back(NumericValue{clamp_int(edu_dist(rng), 1, 16)});
    s.values.push_back(CategoryRef{weighted({46, 14, 33, 3, 3, 1, 1})});
    s.values.push_back(CategoryRef{UniformIndex(rng, 14)});
    s.values.push_back(CategoryRef{weighted({5, 15, 40, 26, 3, 11})});
    s.values.push_back(CategoryRef{weighted({85, 3, 1, 1, 10})});
    s.values.push_back(CategoryRef{weighted({33, 67})});
    s.values.push_back(NumericValue{Bernoulli(rng, 0.08) ? static_cast<std::int64_t>(UniformIndex(rng, 20)) : 0});
    s.values.push_back(NumericValue{Bernoulli(rng, 0.05) ? static_cast<std::int64_t>(UniformIndex(rng, 5)) : 0});
    s.values.push_back(NumericValue{clamp_int(hours_dist(rng), 1, 99)});
    s.values.push_back(CategoryRef{weighted({90, 2, 1, 1, 1, 1, 1, 1, 1, 1})});
    const double p = 1.0 / (1.0 + std::exp(-CensusLogit(s)));
    ds.labels.push_back(Bernoulli(rng, p) ? 1 : 0);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace fairga

#endif  // FAIRGA_SYNTHETIC_HPP_
