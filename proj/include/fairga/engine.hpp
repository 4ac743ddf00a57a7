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

// Explanation-guided genetic search for individual discrimination.
//
// Seeds are samples whose protected-related positions rank within the top
// epsilon of their local explanation. The seeds form the initial
// population(s), which then evolve by fitness-proportional selection,
// fragment crossover and non-sensitive mutation. Every generation, each
// member not checked before is tested for discrimination: substituting its
// protected values must change the predicted label.

#ifndef FAIRGA_ENGINE_HPP_
#define FAIRGA_ENGINE_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/explain.hpp"
#include "fairga/knowledge.hpp"
#include "fairga/model.hpp"
#include "fairga/parallel.hpp"
#include "fairga/rng.hpp"

namespace fairga {

// Protected domains larger than this are checked on an evenly spaced subset.
inline constexpr std::size_t kMaxProtectedValues = 10;

// Synonym lists kept per word for text mutation.
inline constexpr std::size_t kSynonymPool = 10;

// ---------------------------------------------------------------------------
// Search space: where the protected positions of a sample are and which
// values they may take.
// ---------------------------------------------------------------------------

class SearchSpace {
 public:
  SearchSpace(FeatureSchema schema, std::set<std::string> protected_attrs, const KnowledgeGraph* graph = nullptr,
              const EmbeddingStore* embeddings = nullptr)
      : schema_(std::move(schema)),
        protected_(std::move(protected_attrs)),
        graph_(graph),
        embeddings_(embeddings) {
    if (schema_.IsText()) {
      if (graph_ == nullptr) throw Error(ErrorCode::kInvalidArgument, "text search needs a knowledge graph");
      return;
    }
    for (std::size_t i = 0; i < schema_.features.size(); ++i) {
      const auto& rel = schema_.features[i].relates_to;
      if (rel && protected_.count(*rel) != 0) tabular_positions_.push_back(i);
    }
  }

  const FeatureSchema& schema() const { return schema_; }
  const std::set<std::string>& protected_attrs() const { return protected_; }
  const KnowledgeGraph* graph() const { return graph_; }
  const EmbeddingStore* embeddings() const { return embeddings_; }
  bool IsText() const { return schema_.IsText(); }

  // Protected attribute of a token, memoized.
  std::optional<std::string> WordAttribute(const std::string& word) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = word_attr_.find(word);
    if (it == word_attr_.end()) it = word_attr_.emplace(word, graph_->Resolve(word, protected_)).first;
    return it->second;
  }

  std::optional<std::string> AttributeAt(const Sample& x, std::size_t position) const {
    if (!IsText()) {
      const auto& rel = schema_.features.at(position).relates_to;
      if (rel && protected_.count(*rel) != 0) return rel;
      return std::nullopt;
    }
    return WordAttribute(std::get<TokenWord>(x[position]).text);
  }

  // Sorted positions related to a protected attribute.
  std::vector<std::size_t> SensitivePositions(const Sample& x) const {
    if (!IsText()) return tabular_positions_;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (WordAttribute(std::get<TokenWord>(x[i]).text)) out.push_back(i);
    }
    return out;
  }

  // Substitution values for a protected position: the protected domain
  // (tabular, capped at kMaxProtectedValues) or <a~, not a~> (text).
  std::vector<Value> ProtectedVariants(const Sample& x, std::size_t position) const {
    if (IsText()) {
      const auto attr = AttributeAt(x, position);
      if (!attr) throw Error(ErrorCode::kNoPairAvailable, "position is not sensitive");
      const auto pair = GetPair(std::get<TokenWord>(x[position]).text, *attr, *graph_, schema_.markers);
      return {TokenWord{pair.tilde}, TokenWord{pair.neg_tilde}};
    }
    const auto& spec = schema_.features.at(position);
    const std::size_t card = Cardinality(spec);
    std::vector<Value> values;
    if (card <= kMaxProtectedValues) {
      for (std::size_t k = 0; k < card; ++k) values.push_back(GridValue(spec, k));
    } else {
      for (std::size_t i = 0; i < kMaxProtectedValues; ++i) {
        const std::size_t k = (i * (card - 1) + (kMaxProtectedValues - 1) / 2) / (kMaxProtectedValues - 1);
        values.push_back(GridValue(spec, k));
      }
    }
    return values;
  }

  std::string Key(const Sample& x) const {
    const auto positions = SensitivePositions(x);
    return DedupeKey(x, schema_, std::set<std::size_t>(positions.begin(), positions.end()));
  }

 private:
  FeatureSchema schema_;
  std::set<std::string> protected_;
  const KnowledgeGraph* graph_;
  const EmbeddingStore* embeddings_;
  std::vector<std::size_t> tabular_positions_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::optional<std::string>> word_attr_;
};

// Memoized synonym lists excluding sensitive words.
class SynonymCache {
 public:
  explicit SynonymCache(const SearchSpace& space) : space_(space) {}

  // Empty when the word is out of vocabulary or no embeddings are loaded.
  const std::vector<std::string>& Get(const std::string& word) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(word);
    if (it != cache_.end()) return it->second;
    std::vector<std::string> list;
    const auto* store = space_.embeddings();
    if (store != nullptr && store->Contains(word)) {
      list = Synonyms(word, *store, kSynonymPool, space_.graph(), space_.protected_attrs());
    } else {
      ++oov_;
    }
    return cache_.emplace(word, std::move(list)).first->second;
  }

  std::size_t oov_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return oov_;
  }

 private:
  const SearchSpace& space_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::vector<std::string>> cache_;
  mutable std::size_t oov_ = 0;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class SearchMode { kGa, kRandom };

struct EngineConfig {
  std::size_t epsilon = 7;
  std::size_t seed_num = 100;
  // Generation budget; nullopt = unbounded (another budget must be set).
  std::optional<std::size_t> max_generations = 100;
  std::optional<double> time_budget;
  // Stops once this many discriminatory checks have run.
  std::optional<std::size_t> tsn_budget;
  double cr = 0.9;
  double mr = 0.05;
  std::size_t k = 20;
  std::uint64_t rng_seed = 0;
  SearchMode mode = SearchMode::kGa;
  std::size_t workers = 1;

  void Validate() const {
    if (epsilon < 1) throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 1");
    if (seed_num < 1) throw Error(ErrorCode::kInvalidArgument, "seed_num must be >= 1");
    if (cr < 0.0 || cr > 1.0) throw Error(ErrorCode::kInvalidArgument, "cr must be in [0, 1]");
    if (mr < 0.0 || mr > 1.0) throw Error(ErrorCode::kInvalidArgument, "mr must be in [0, 1]");
    if (!max_generations && !time_budget && !tsn_budget) {
      throw Error(ErrorCode::kInvalidArgument, "at least one of generations, time or TSN budget must be bounded");
    }
    if (time_budget && !(*time_budget > 0.0)) throw Error(ErrorCode::kInvalidArgument, "time budget must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Seed selection
// ---------------------------------------------------------------------------

struct Seed {
  Sample sample;
  std::size_t row = 0;                 // dataset row
  std::size_t sensitive_position = 0;  // best-ranked protected position
  std::size_t rank = 0;
};

// Best (smallest) rank among the protected positions of x, with its position.
inline std::optional<std::pair<std::size_t, std::size_t>> BestSensitiveRank(const Sample& x, const SearchSpace& space,
                                                                           const Explanation& e) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (auto pos : space.SensitivePositions(x)) {
    const auto r = RankNum(pos, e);
    if (!best || r < best->first) best = {{r, pos}};
  }
  return best;
}

// Walks X in order, keeping samples whose best protected rank is <= epsilon,
// until seed_num seeds are found.
inline std::vector<Seed> SelectSeeds(const Dataset& X, const SearchSpace& space, const Predictor& f,
                                     const Explainer& g, std::size_t epsilon, std::size_t seed_num,
                                     std::size_t workers = 1) {
  std::vector<Seed> seeds;
  bool any_sensitive = false;
  const std::size_t chunk = std::max<std::size_t>(workers, 1);
  for (std::size_t start = 0; start < X.size() && seeds.size() < seed_num; start += chunk) {
    const std::size_t n = std::min(chunk, X.size() - start);
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> best(n);
    ParallelFor(n, workers, [&](std::size_t i) {
      const auto& x = X.samples[start + i];
      if (space.SensitivePositions(x).empty()) return;
      const auto label = f.PredictLabel(x);
      best[i] = BestSensitiveRank(x, space, g.Explain(x, f, label, start + i));
    });
    for (std::size_t i = 0; i < n && seeds.size() < seed_num; ++i) {
      if (!best[i]) continue;
      any_sensitive = true;
      if (best[i]->first <= epsilon) {
        Seed s{X.samples[start + i], start + i, best[i]->second, best[i]->first};
        s.sample.origin = Origin::kSeed;
        s.sample.seed_id = seeds.size();
        seeds.push_back(std::move(s));
      }
    }
  }
  if (!any_sensitive) throw Error(ErrorCode::kNoSensitiveFeature, "no sample has a protected-related position");
  if (seeds.empty()) {
    throw Error(ErrorCode::kEmptySeedSet, "no sample ranks a protected position within epsilon=" +
                                              std::to_string(epsilon) + "; raise epsilon");
  }
  return seeds;
}

// Explains up to `sample_count` random explainable rows and returns the best
// protected rank of the sample at the 20th percentile (the 20th of 100).
inline std::size_t AutoEpsilon(const Dataset& X, const SearchSpace& space, const Predictor& f, const Explainer& g,
                               std::uint64_t rng_seed, std::size_t sample_count = 100, std::size_t workers = 1) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (!space.SensitivePositions(X.samples[i]).empty()) rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorCode::kNoSensitiveFeature, "no sample has a protected-related position");
  Rng rng(rng_seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  if (rows.size() > sample_count) rows.resize(sample_count);
  std::vector<std::size_t> ranks(rows.size());
  ParallelFor(rows.size(), workers, [&](std::size_t i) {
    const auto& x = X.samples[rows[i]];
    ranks[i] = BestSensitiveRank(x, space, g.Explain(x, f, f.PredictLabel(x), rows[i]))->first;
  });
  std::sort(ranks.begin(), ranks.end());
  const std::size_t idx = (ranks.size() * 20 + 99) / 100;  // ceil(20%)
  return ranks[std::max<std::size_t>(idx, 1) - 1];
}

// ---------------------------------------------------------------------------
// Fitness and the discriminatory check
// ---------------------------------------------------------------------------

struct FitnessResult {
  double fitness = 0.0;
  double prob_a = 0.0;
  double prob_b = 0.0;
};

// |Prob(x', l) - Prob(x'', l)| generalized to the spread max - min over the
// substitution values; with two values this is exactly the pair gap.
inline FitnessResult Fitness(const Sample& x, std::size_t position, const std::vector<Value>& variants,
                             const Predictor& f, std::size_t target_label) {
  FitnessResult r;
  bool first = true;
  for (const auto& v : variants) {
    const double p = f.PredictProba(x.With(position, v))[target_label];
    if (first || p > r.prob_a) r.prob_a = p;
    if (first || p < r.prob_b) r.prob_b = p;
    first = false;
  }
  r.fitness = r.prob_a - r.prob_b;
  return r;
}

// Target label is f's prediction for the individual itself.
inline void EvaluateIndividual(Individual& ind, const Predictor& f, const SearchSpace& space) {
  std::vector<Value> variants;
  try {
    variants = space.ProtectedVariants(ind.sample, ind.focus);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoPairAvailable) throw;
    ind.fitness = 0.0;
    ind.pair_witness = {0.0, 0.0};
    return;
  }
  const auto r = Fitness(ind.sample, ind.focus, variants, f, f.PredictLabel(ind.sample));
  ind.fitness = r.fitness;
  ind.pair_witness = {r.prob_a, r.prob_b};
}

// Tries every protected position of x; returns a record for the first pair
// of substitutions with different predicted labels.
inline std::optional<DiscriminatoryRecord> FindDiscrimination(const Sample& x, const Predictor& f,
                                                              const SearchSpace& space) {
  for (auto pos : space.SensitivePositions(x)) {
    std::vector<Value> variants;
    try {
      variants = space.ProtectedVariants(x, pos);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoPairAvailable) continue;
      throw;
    }
    if (variants.size() < 2) continue;
    Sample first = x.With(pos, variants[0]);
    const auto first_label = f.PredictLabel(first);
    for (std::size_t j = 1; j < variants.size(); ++j) {
      Sample other = x.With(pos, variants[j]);
      const auto label = f.PredictLabel(other);
      if (label == first_label) continue;
      DiscriminatoryRecord rec;
      rec.sample = x;
      rec.sensitive_index = pos;
      rec.variant_a = std::move(first);
      rec.variant_b = std::move(other);
      rec.label_a = f.labels()[first_label];
      rec.label_b = f.labels()[label];
      rec.dedupe_key = space.Key(x);
      return rec;
    }
  }
  return std::nullopt;
}

// The discriminatory check with its TSN counter.
class DiscriminationChecker {
 public:
  DiscriminationChecker(const Predictor& f, const SearchSpace& space) : f_(f), space_(space) {}

  std::optional<DiscriminatoryRecord> operator()(const Sample& x) const {
    tsn_.fetch_add(1, std::memory_order_relaxed);
    return FindDiscrimination(x, f_, space_);
  }

  std::size_t tsn() const { return tsn_.load(std::memory_order_relaxed); }

 private:
  const Predictor& f_;
  const SearchSpace& space_;
  mutable std::atomic<std::size_t> tsn_{0};
};

// Independent re-verification of a record: variants differ from the sample
// only at the protected position, and their predicted labels differ.
inline bool VerifyRecord(const DiscriminatoryRecord& rec, const Predictor& f, const SearchSpace& space) {
  const auto& x = rec.sample;
  if (rec.variant_a.size() != x.size() || rec.variant_b.size() != x.size()) return false;
  if (rec.sensitive_index >= x.size() || !space.AttributeAt(x, rec.sensitive_index)) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i == rec.sensitive_index) continue;
    if (rec.variant_a[i] != x[i] || rec.variant_b[i] != x[i]) return false;
  }
  if (rec.variant_a[rec.sensitive_index] == rec.variant_b[rec.sensitive_index]) return false;
  const auto la = f.PredictLabel(rec.variant_a);
  const auto lb = f.PredictLabel(rec.variant_b);
  return la != lb && f.labels()[la] == rec.label_a && f.labels()[lb] == rec.label_b;
}

// ---------------------------------------------------------------------------
// Population construction and operators
// ---------------------------------------------------------------------------

// Tabular: one population holding every seed. Text: one population per seed,
// the seed plus k variants that each replace one non-sensitive word by an
// embedding neighbour.
inline std::vector<Population> InitPopulation(const std::vector<Seed>& seeds, const SearchSpace& space,
                                              const SynonymCache& synonyms, std::size_t k, Rng& rng) {
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "no seeds");
  std::vector<Population> pops;
  if (!space.IsText()) {
    Population pop;
    for (const auto& s : seeds) pop.members.push_back({s.sample, std::nullopt, std::nullopt, s.sensitive_position});
    pops.push_back(std::move(pop));
    return pops;
  }
  for (std::size_t sid = 0; sid < seeds.size(); ++sid) {
    const auto& seed = seeds[sid];
    Population pop;
    pop.seed_id = sid;
    pop.members.push_back({seed.sample, std::nullopt, std::nullopt, seed.sensitive_position});
    const auto sensitive = space.SensitivePositions(seed.sample);
    std::vector<std::size_t> replaceable;
    for (std::size_t i = 0; i < seed.sample.size(); ++i) {
      if (std::binary_search(sensitive.begin(), sensitive.end(), i)) continue;
      if (!synonyms.Get(std::get<TokenWord>(seed.sample[i]).text).empty()) replaceable.push_back(i);
    }
    std::shuffle(replaceable.begin(), replaceable.end(), rng);
    for (std::size_t v = 0; v < k; ++v) {
      Individual ind{seed.sample, std::nullopt, std::nullopt, seed.sensitive_position};
      ind.sample.origin = Origin::kGenerated;
      if (!replaceable.empty()) {
        const std::size_t pos = replaceable[v % replaceable.size()];
        const auto& syn = synonyms.Get(std::get<TokenWord>(seed.sample[pos]).text);
        ind.sample.values[pos] = TokenWord{syn[(v / replaceable.size()) % syn.size()]};
      }
      pop.members.push_back(std::move(ind));
    }
    pops.push_back(std::move(pop));
  }
  return pops;
}

// Selection probabilities fit(x) / sumFit; uniform when sumFit is 0.
inline std::vector<double> SelectionProbabilities(const Population& pop) {
  std::vector<double> probs(pop.size());
  double sum = 0.0;
  for (const auto& m : pop.members) sum += m.fitness.value_or(0.0);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    probs[i] = sum > 0.0 ? pop.members[i].fitness.value_or(0.0) / sum : 1.0 / static_cast<double>(pop.size());
  }
  return probs;
}

// Roulette-wheel sampling with replacement; output size equals input size.
inline Population Select(const Population& pop, Rng& rng) {
  const auto probs = SelectionProbabilities(pop);
  std::vector<double> cumulative(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cumulative.begin());
  Population next;
  next.generation = pop.generation;
  next.seed_id = pop.seed_id;
  next.members.reserve(pop.size());
  while (next.members.size() < pop.size()) {
    const double u = Uniform01(rng) * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), pop.size() - 1);
    next.members.push_back(pop.members[idx]);
  }
  return next;
}

// Each member, with probability cr, swaps a random contiguous fragment
// [i..j] with the same index range of a random partner.
inline void Crossover(Population& pop, double cr, Rng& rng) {
  const std::size_t n = pop.size();
  if (n < 2) return;
  for (std::size_t a = 0; a < n; ++a) {
    if (!Bernoulli(rng, cr)) continue;
    std::size_t b = UniformIndex(rng, n - 1);
    if (b >= a) ++b;
    auto& xa = pop.members[a].sample.values;
    auto& xb = pop.members[b].sample.values;
    const std::size_t len = std::min(xa.size(), xb.size());
    if (len == 0) continue;
    std::size_t i = UniformIndex(rng, len);
    std::size_t j = UniformIndex(rng, len);
    if (i > j) std::swap(i, j);
    for (std::size_t p = i; p <= j; ++p) std::swap(xa[p], xb[p]);
    pop.members[a].sample.origin = Origin::kGenerated;
    pop.members[b].sample.origin = Origin::kGenerated;
    pop.members[a].Invalidate();
    pop.members[b].Invalidate();
  }
}

// Words already placed at a text position by mutation (or originally there).
using UsedWords = std::map<std::size_t, std::set<std::string>>;

// Mutates one non-sensitive value in place; returns whether it changed.
inline bool MutateValue(Value& value, const FeatureSpec& spec, std::size_t position, const SynonymCache* synonyms,
                        UsedWords* used, Rng& rng) {
  if (const auto* c = std::get_if<Categorical>(&spec.kind)) {
    if (c->domain.size() < 2) return false;
    const auto cur = std::get<CategoryRef>(value).index;
    std::size_t next = UniformIndex(rng, c->domain.size() - 1);
    if (next >= cur) ++next;
    value = CategoryRef{next};
    return true;
  }
  if (const auto* n = std::get_if<Numeric>(&spec.kind)) {
    const auto cur = std::get<NumericValue>(value).value;
    const auto u = static_cast<std::int64_t>(UniformIndex(rng, 5) + 1);
    const std::int64_t sign = Bernoulli(rng, 0.5) ? 1 : -1;
    const auto next = std::clamp(cur + sign * u * n->step, n->min, n->max);
    value = NumericValue{next};
    return next != cur;
  }
  if (synonyms == nullptr) return false;
  const auto& word = std::get<TokenWord>(value).text;
  const auto& candidates = synonyms->Get(word);
  for (const auto& cand : candidates) {
    if (used != nullptr && (*used)[position].count(cand) != 0) continue;
    if (used != nullptr) (*used)[position].insert(cand);
    value = TokenWord{cand};
    return true;
  }
  return false;
}

// Each non-sensitive position mutates independently with probability mr.
inline void Mutate(Population& pop, double mr, const SearchSpace& space, const SynonymCache* synonyms,
                   UsedWords* used, Rng& rng) {
  for (auto& m : pop.members) {
    const auto sensitive = space.SensitivePositions(m.sample);
    bool changed = false;
    for (std::size_t i = 0; i < m.sample.size(); ++i) {
      if (std::binary_search(sensitive.begin(), sensitive.end(), i)) continue;
      if (!Bernoulli(rng, mr)) continue;
      changed |= MutateValue(m.sample.values[i], SpecAt(space.schema(), i), i, synonyms, used, rng);
    }
    if (changed) {
      m.sample.origin = Origin::kGenerated;
      m.Invalidate();
    }
  }
}

// Random-exploration replacement for select/crossover/mutate: every member
// becomes a uniform sample of the feature space (text: every non-sensitive
// word becomes a uniform vocabulary word).
inline void Randomize(Population& pop, const SearchSpace& space, const std::vector<std::string>& vocabulary, Rng& rng) {
  for (auto& m : pop.members) {
    if (!space.IsText()) {
      m.sample = RandomSample(space.schema(), rng);
    } else if (!vocabulary.empty()) {
      const auto sensitive = space.SensitivePositions(m.sample);
      for (std::size_t i = 0; i < m.sample.size(); ++i) {
        if (std::binary_search(sensitive.begin(), sensitive.end(), i)) continue;
        m.sample.values[i] = TokenWord{vocabulary[UniformIndex(rng, vocabulary.size())]};
      }
      m.sample.origin = Origin::kGenerated;
    }
    m.Invalidate();
  }
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

struct RunResult {
  std::vector<DiscriminatoryRecord> records;
  RunMetrics metrics;
  std::size_t epsilon = 0;
  std::size_t seeds = 0;
  std::size_t generations = 0;
  std::uint64_t model_queries = 0;
  // |DisSet| after each generation.
  std::vector<std::size_t> dsn_history;
};

inline RunResult Run(const Dataset& X, const SearchSpace& space, const Predictor& f, const Explainer& g,
                     const EngineConfig& config) {
  config.Validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto queries_before = f.query_count();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  RunResult result;
  result.epsilon = config.epsilon;
  const auto seeds = SelectSeeds(X, space, f, g, config.epsilon, config.seed_num, config.workers);
  result.seeds = seeds.size();

  Rng rng = MakeStream(config.rng_seed, 0);
  SynonymCache synonyms(space);
  auto pops = InitPopulation(seeds, space, synonyms, config.k, rng);

  std::vector<UsedWords> used(pops.size());
  for (std::size_t p = 0; p < pops.size() && space.IsText(); ++p) {
    const auto& s = pops[p].members.front().sample;
    for (std::size_t i = 0; i < s.size(); ++i) used[p][i].insert(std::get<TokenWord>(s[i]).text);
  }
  std::vector<std::string> vocabulary;
  if (space.IsText() && config.mode == SearchMode::kRandom && space.embeddings() != nullptr) {
    for (const auto& w : space.embeddings()->words()) {
      if (!space.WordAttribute(w)) vocabulary.push_back(w);
    }
  }

  DiscriminationChecker check(f, space);
  std::unordered_set<std::string> checked;
  std::unordered_set<std::string> found;

  auto out_of_budget = [&] {
    if (config.tsn_budget && check.tsn() >= *config.tsn_budget) return true;
    if (config.time_budget && elapsed() >= *config.time_budget) return true;
    return false;
  };

  for (std::size_t gen = 0; !config.max_generations || gen < *config.max_generations; ++gen) {
    if (out_of_budget()) break;
    for (std::size_t p = 0; p < pops.size() && !out_of_budget(); ++p) {
      auto& pop = pops[p];
      if (config.mode == SearchMode::kGa) {
        ParallelFor(pop.size(), config.workers, [&](std::size_t i) {
          if (!pop.members[i].fitness) EvaluateIndividual(pop.members[i], f, space);
        });
        pop = Select(pop, rng);
        Crossover(pop, config.cr, rng);
        Mutate(pop, config.mr, space, &synonyms, space.IsText() ? &used[p] : nullptr, rng);
      } else {
        Randomize(pop, space, vocabulary, rng);
      }
      ++pop.generation;

      // Members whose dedupe key was never checked, in member order.
      std::vector<std::size_t> fresh;
      std::vector<std::string> keys;
      std::unordered_set<std::string> batch;
      for (std::size_t i = 0; i < pop.size(); ++i) {
        auto key = space.Key(pop.members[i].sample);
        if (checked.count(key) != 0 || !batch.insert(key).second) continue;
        fresh.push_back(i);
        keys.push_back(std::move(key));
      }
      if (config.tsn_budget) {
        const std::size_t left = *config.tsn_budget - std::min(*config.tsn_budget, check.tsn());
        if (fresh.size() > left) {
          fresh.resize(left);
          keys.resize(left);
        }
      }
      std::vector<std::optional<DiscriminatoryRecord>> outcome(fresh.size());
      ParallelFor(fresh.size(), config.workers,
                  [&](std::size_t i) { outcome[i] = check(pop.members[fresh[i]].sample); });
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        checked.insert(keys[i]);
        if (outcome[i] && found.insert(outcome[i]->dedupe_key).second) {
          result.records.push_back(std::move(*outcome[i]));
        }
      }
    }
    ++result.generations;
    result.dsn_history.push_back(result.records.size());
  }

  result.metrics.tsn = check.tsn();
  result.metrics.dsn = result.records.size();
  result.metrics.elapsed = elapsed();
  result.model_queries = f.query_count() - queries_before;
  return result;
}

}  // namespace fairga

#endif  // FAIRGA_ENGINE_HPP_
