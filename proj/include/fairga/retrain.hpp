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

// Fairness repair by augmenting the training data with relabeled
// discriminatory pairs, and before/after evaluation of the repair.

#ifndef FAIRGA_RETRAIN_HPP_
#define FAIRGA_RETRAIN_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/engine.hpp"
#include "fairga/explain.hpp"
#include "fairga/metrics.hpp"
#include "fairga/model.hpp"
#include "json.hpp"

namespace fairga {

enum class LabelPolicy {
  // Majority prediction of f over the protected domain of the sample.
  kMajority,
  // The dataset label when the sample occurs in the dataset, else kMajority.
  kOriginal,
};

inline std::size_t AugmentationCount(std::size_t dataset_size, std::size_t record_count, double fraction,
                                     bool text) {
  const double base = static_cast<double>(text ? record_count : dataset_size);
  return static_cast<std::size_t>(std::ceil(fraction * base - 1e-9));
}

// Majority label of f over every value of the sensitive feature (tabular) or
// over the recorded pair (text); ties go to the lexicographically smallest
// label name.
inline std::size_t ConsistentLabel(const DiscriminatoryRecord& r, const Predictor& f, const FeatureSchema& schema) {
  std::vector<std::size_t> votes(f.labels().size(), 0);
  if (schema.IsText()) {
    ++votes[f.PredictLabel(r.variant_a)];
    ++votes[f.PredictLabel(r.variant_b)];
  } else {
    const auto& spec = schema.features.at(r.sensitive_index);
    for (std::size_t k = 0; k < Cardinality(spec); ++k) {
      ++votes[f.PredictLabel(r.sample.With(r.sensitive_index, GridValue(spec, k)))];
    }
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < votes.size(); ++l) {
    if (votes[l] > votes[best] || (votes[l] == votes[best] && f.labels()[l] < f.labels()[best])) best = l;
  }
  return best;
}

namespace detail {

inline std::string FullKey(const Sample& s, const FeatureSchema& schema) { return DedupeKey(s, schema, {}); }

}  // namespace detail

// Appends both variants of every record to X, each pair sharing one label.
inline Dataset AddRecordPairs(const Dataset& X, const std::vector<DiscriminatoryRecord>& records, const Predictor& f,
                              LabelPolicy policy = LabelPolicy::kMajority) {
  if (!X.HasLabels()) throw Error(ErrorCode::kInvalidArgument, "augmentation needs a labeled dataset");
  std::unordered_map<std::string, std::size_t> original;
  if (policy == LabelPolicy::kOriginal) {
    for (std::size_t i = 0; i < X.size(); ++i) original.emplace(detail::FullKey(X.samples[i], X.schema), X.labels[i]);
  }
  Dataset out = X;
  for (const auto& r : records) {
    auto it = original.find(detail::FullKey(r.sample, X.schema));
    const std::size_t label = it != original.end() ? it->second : ConsistentLabel(r, f, X.schema);
    for (const auto* v : {&r.variant_a, &r.variant_b}) {
      Sample s = *v;
      s.origin = Origin::kGenerated;
      if (!SampleValid(s, X.schema)) throw Error(ErrorCode::kInvalidSchema, "record does not fit the schema");
      out.samples.push_back(std::move(s));
      out.labels.push_back(label);
    }
  }
  return out;
}

// Adds the first AugmentationCount(...) records: ceil(fraction * |X|) for
// tabular data, ceil(fraction * |records|) for text.
inline Dataset AugmentDataset(const Dataset& X, const std::vector<DiscriminatoryRecord>& records, double fraction,
                              const Predictor& f, LabelPolicy policy = LabelPolicy::kMajority) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "fraction must be in (0, 1]");
  if (records.empty()) throw Error(ErrorCode::kNotEnoughRecords, "no discriminatory records to add");
  const std::size_t count = AugmentationCount(X.size(), records.size(), fraction, X.schema.IsText());
  if (count > records.size()) {
    throw Error(ErrorCode::kNotEnoughRecords, "need " + std::to_string(count) + " records, have " +
                                                  std::to_string(records.size()));
  }
  return AddRecordPairs(X, {records.begin(), records.begin() + static_cast<std::ptrdiff_t>(count)}, f, policy);
}

struct RecordSplit {
  std::vector<DiscriminatoryRecord> augmentation;
  std::vector<DiscriminatoryRecord> holdout;
};

// Shuffles the records; the first `augmentation_count` are for retraining,
// the rest (at most holdout_cap) are held out. Duplicate keys are dropped.
inline RecordSplit SplitRecords(std::vector<DiscriminatoryRecord> records, std::size_t augmentation_count,
                                std::uint64_t seed, std::size_t holdout_cap = 1000) {
  std::set<std::string> seen;
  std::vector<DiscriminatoryRecord> unique;
  for (auto& r : records) {
    if (seen.insert(r.dedupe_key).second) unique.push_back(std::move(r));
  }
  if (augmentation_count > unique.size()) {
    throw Error(ErrorCode::kNotEnoughRecords, "need " + std::to_string(augmentation_count) + " records, have " +
                                                  std::to_string(unique.size()));
  }
  Rng rng = MakeStream(seed, 1);
  std::shuffle(unique.begin(), unique.end(), rng);
  RecordSplit split;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (i < augmentation_count) {
      split.augmentation.push_back(std::move(unique[i]));
    } else if (split.holdout.size() < holdout_cap) {
      split.holdout.push_back(std::move(unique[i]));
    }
  }
  return split;
}

inline void AssertDisjoint(const std::vector<DiscriminatoryRecord>& a, const std::vector<DiscriminatoryRecord>& b) {
  std::set<std::string> keys;
  for (const auto& r : a) keys.insert(r.dedupe_key);
  for (const auto& r : b) {
    if (keys.count(r.dedupe_key) != 0) {
      throw Error(ErrorCode::kInvalidArgument, "holdout record also used for augmentation: " + r.dedupe_key);
    }
  }
}

struct RetrainConfig {
  TrainConfig train;
  EngineConfig engine;
  ExplainerConfig explainer;
  LabelPolicy policy = LabelPolicy::kMajority;
};

struct BeforeAfter {
  double before = 0.0;
  double after = 0.0;
};

struct FairnessReport {
  std::size_t records_added = 0;  // discriminatory records used
  std::size_t samples_added = 0;  // rows appended (two per record)
  std::size_t holdout_size = 0;
  BeforeAfter normal_accuracy;
  // Fraction of held-out records that are still discriminatory.
  BeforeAfter discriminatory_percentage;
  RunMetrics run_before;
  RunMetrics run_after;
  double train_accuracy_after = 0.0;
};

inline double StillDiscriminatory(const std::vector<DiscriminatoryRecord>& holdout, const Predictor& f,
                                  const SearchSpace& space) {
  if (holdout.empty()) return 0.0;
  std::size_t still = 0;
  for (const auto& r : holdout) {
    if (FindDiscrimination(r.sample, f, space)) ++still;
  }
  return static_cast<double>(still) / static_cast<double>(holdout.size());
}

// Trains a fresh model on `train` augmented with `augmentation` and compares
// it with `before` on normal test accuracy, the held-out records and a fresh
// engine run (the engine searches `train`).
inline FairnessReport RetrainAndEvaluate(const Dataset& train, const Dataset& test,
                                         const std::vector<DiscriminatoryRecord>& augmentation,
                                         const std::vector<DiscriminatoryRecord>& holdout, const Predictor& before,
                                         const SearchSpace& space, const RetrainConfig& config) {
  AssertDisjoint(augmentation, holdout);
  FairnessReport report;
  const Dataset augmented = AddRecordPairs(train, augmentation, before, config.policy);
  report.records_added = (augmented.size() - train.size()) / 2;
  report.samples_added = augmented.size() - train.size();
  report.holdout_size = holdout.size();
  auto trained = Train(augmented, config.train);
  const Predictor& after = *trained.model;
  report.train_accuracy_after = trained.train_accuracy;

  report.normal_accuracy = {Accuracy(before, test), Accuracy(after, test)};
  report.discriminatory_percentage = {StillDiscriminatory(holdout, before, space),
                                      StillDiscriminatory(holdout, after, space)};
  SurrogateExplainer g(space.schema(), config.explainer);
  report.run_before = Run(train, space, before, g, config.engine).metrics;
  report.run_after = Run(train, space, after, g, config.engine).metrics;
  return report;
}

inline nlohmann::ordered_json FairnessReportToJson(const FairnessReport& r) {
  auto pair = [](const BeforeAfter& v) {
    nlohmann::ordered_json j;
    j["before"] = v.before;
    j["after"] = v.after;
    return j;
  };
  auto dss = [](const RunMetrics& m) {
    const auto d = m.dss();
    return d ? nlohmann::ordered_json(*d) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["samples_added"] = r.samples_added;
  j["records_added"] = r.records_added;
  j["holdout_size"] = r.holdout_size;
  j["normal_sample_testing_accuracy"] = pair(r.normal_accuracy);
  j["discriminatory_sample_testing_percentage"] = pair(r.discriminatory_percentage);
  j["dss"]["before"] = dss(r.run_before);
  j["dss"]["after"] = dss(r.run_after);
  j["sur"] = pair({r.run_before.sur(), r.run_after.sur()});
  j["runs"]["before"] = MetricsToJson(r.run_before);
  j["runs"]["after"] = MetricsToJson(r.run_after);
  return j;
}

}  // namespace fairga

#endif  // FAIRGA_RETRAIN_HPP_
