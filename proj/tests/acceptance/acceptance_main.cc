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

// Acceptance checks A1 to A9. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails. `acceptance A3 A6` runs a subset.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairga/engine.hpp"
#include "fairga/explain.hpp"
#include "fairga/knowledge.hpp"
#include "fairga/metrics.hpp"
#include "fairga/records.hpp"
#include "fairga/retrain.hpp"
#include "fairga/synthetic.hpp"
#include "support/test_util.hpp"

#ifndef FAIRGA_CLI
#error "FAIRGA_CLI must name the fairga binary"
#endif
#ifndef FAIRGA_DATA_DIR
#error "FAIRGA_DATA_DIR must name the data directory"
#endif

namespace fairga {
namespace {

using ::fairga::testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

void Progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

int Shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

const std::string kCli = FAIRGA_CLI;
const std::filesystem::path kData = FAIRGA_DATA_DIR;

// ---------------------------------------------------------------------------
// Shared benchmark pieces
// ---------------------------------------------------------------------------

// Keys of every planted-space point whose two sex values get different labels,
// by direct enumeration.
std::set<std::string> PlantedOracle(const Predictor& f) {
  return ::fairga::testing::OracleKeys(PlantedSchema(), f);
}

EngineConfig PlantedEngine(std::size_t tsn_budget, std::uint64_t seed, SearchMode mode) {
  EngineConfig c;
  c.epsilon = 1;
  c.seed_num = 500;
  c.mr = 0.05;
  c.max_generations = 2000;
  c.tsn_budget = tsn_budget;
  c.rng_seed = seed;
  c.mode = mode;
  return c;
}

ExplainerConfig Perturbations(std::size_t n) {
  ExplainerConfig c;
  c.n_perturb = n;
  return c;
}

// Writes the records, reloads them and the model from disk, and re-checks
// each one with nothing but the reloaded model.
RecheckSummary RecheckThroughFiles(const std::vector<DiscriminatoryRecord>& records, const Predictor& model,
                                   const FeatureSchema& schema, const std::set<std::string>& protected_attrs) {
  TempDir dir;
  WriteRecords(records, schema, dir / "records.csv");
  if (const auto* nm = dynamic_cast<const NeuralModel*>(&model)) {
    SaveModel(*nm, dir / "model.json");
  } else if (const auto* tm = dynamic_cast<const TableModel*>(&model)) {
    SaveModel(*tm, dir / "model.json");
  } else {
    throw Error(ErrorCode::kInvalidArgument, "model cannot be saved");
  }
  const auto loaded = LoadModel(dir / "model.json");
  auto s = schema;
  s.protected_attrs = protected_attrs;
  return RecheckRecords(ReadRecords(dir / "records.csv", s), *loaded.predictor, s);
}

// ---------------------------------------------------------------------------
// A1
// ---------------------------------------------------------------------------

Outcome A1() {
  const double sur = Sur(141049, 491323);
  const auto dss = Dss(3600, 29467);
  const bool ok = std::fabs(sur - 0.2870) <= 1e-4 && dss && std::fabs(*dss - 0.1222) <= 5e-4;
  return {ok, Fmt("sur(141049, 491323) = %.6f, dss(3600, 29467) = %.6f", sur, dss.value_or(-1))};
}

// ---------------------------------------------------------------------------
// A2
// ---------------------------------------------------------------------------

Outcome A2() {
  std::size_t total = 0;
  std::size_t verified = 0;
  std::size_t runs = 0;
  auto account = [&](const RecheckSummary& s) {
    total += s.total;
    verified += s.verified;
    ++runs;
  };

  // Library runs re-checked through records.csv and a model file.
  const auto planted = PlantedModel();
  const auto X = PlantedDataset(500, 7, PlantedLabels::kBiased);
  SearchSpace space(PlantedSchema(), {"sex"});
  SurrogateExplainer g(PlantedSchema(), Perturbations(1000));
  for (auto mode : {SearchMode::kGa, SearchMode::kRandom}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto r = Run(X, space, *planted, g, PlantedEngine(2000, seed, mode));
      const auto s = RecheckThroughFiles(r.records, *planted, PlantedSchema(), {"sex"});
      account(s);
    }
  }
  Progress("planted runs re-checked");

  const auto census = CensusDataset(1500, 2);
  TrainConfig tc;
  tc.hidden_layers = 2;
  tc.neurons = 32;
  tc.epochs = 10;
  tc.rng_seed = 4;
  const auto model = Train(census, tc);
  SearchSpace census_space(census.schema, {"sex", "race"});
  SurrogateExplainer cg(census.schema, Perturbations(500));
  for (auto mode : {SearchMode::kGa, SearchMode::kRandom}) {
    EngineConfig c;
    c.epsilon = 3;
    c.seed_num = 50;
    c.max_generations = 50;
    c.mode = mode;
    const auto r = Run(census, census_space, *model.model, cg, c);
    const auto s = RecheckThroughFiles(r.records, *model.model, census.schema, {"sex", "race"});
    account(s);
  }
  Progress("census runs re-checked");

  // CLI runs re-checked by `fairga verify` (tabular and text).
  TempDir dir;
  bool cli_ok = Shell(kCli + " synth --kind planted --rows 400 --seed 5 --out " + Q(dir / "p")) == 0;
  cli_ok &= Shell(kCli + " test --data " + Q(dir / "p" / "data.csv") + " --model-file " + Q(dir / "p" / "model.json") +
                  " --protected sex --epsilon 1 --seed-num 300 --tsn-budget 400 --generations 200 --out " + Q(dir / "prun")) == 0;
  cli_ok &= Shell(kCli + " verify --run " + Q(dir / "prun")) == 0;
  cli_ok &= Shell(kCli + " train --data " + Q(kData / "text" / "reviews.txt") + " --schema " +
                  Q(kData / "schemas" / "reviews.json") + " --model bow --epochs 50 --out " + Q(dir / "t" / "m.json")) ==
            0;
  cli_ok &= Shell(kCli + " test --data " + Q(kData / "text" / "reviews.txt") + " --model-file " + Q(dir / "t" / "m.json") +
                  " --graph " + Q(kData / "text" / "knowledge_graph.tsv") + " --embeddings " +
                  Q(kData / "text" / "embeddings.txt") + " --epsilon 3 --n-perturb 300 --generations 10 --out " +
                  Q(dir / "trun")) == 0;
  cli_ok &= Shell(kCli + " verify --run " + Q(dir / "trun")) == 0;
  Progress("CLI runs verified");

  return {verified == total && cli_ok && total > 0,
          Fmt("%zu/%zu records from %zu library runs re-verified; CLI verify (tabular, text): %s", verified, total,
              runs, cli_ok ? "ok" : "FAILED")};
}

// ---------------------------------------------------------------------------
// A3
// ---------------------------------------------------------------------------

Outcome A3() {
  const auto f = PlantedModel();
  const auto oracle = PlantedOracle(*f);
  const auto X = PlantedDataset(500, 7, PlantedLabels::kBiased);
  SearchSpace space(PlantedSchema(), {"sex"});
  SurrogateExplainer g(PlantedSchema(), Perturbations(1000));
  const auto r = Run(X, space, *f, g, PlantedEngine(20 * SpaceSize(PlantedSchema()), 0, SearchMode::kGa));
  std::size_t inside = 0;
  std::set<std::string> found;
  for (const auto& rec : r.records) {
    inside += oracle.count(rec.dedupe_key);
    found.insert(rec.dedupe_key);
  }
  std::size_t recovered = 0;
  for (const auto& k : oracle) recovered += found.count(k);
  const double recall = oracle.empty() ? 0.0 : static_cast<double>(recovered) / static_cast<double>(oracle.size());
  const bool ok = recall >= 0.90 && inside == r.records.size() && !r.records.empty();
  return {ok, Fmt("recovered %zu/%zu oracle keys (%.1f%%), %zu/%zu findings inside the oracle set, tsn %zu", recovered,
                  oracle.size(), 100.0 * recall, inside, r.records.size(), r.metrics.tsn)};
}

// ---------------------------------------------------------------------------
// A4
// ---------------------------------------------------------------------------

struct Ablation {
  double sur_ga = 0;
  double sur_random = 0;
  RunComparison cmp;
  bool pass = false;
  std::string detail;
};

double DssOrInf(const RunMetrics& m) { return m.dss().value_or(std::numeric_limits<double>::infinity()); }

Ablation CompareModes(const Dataset& X, const SearchSpace& space, const Predictor& f, const Explainer& g,
                      const std::function<EngineConfig(std::uint64_t, SearchMode)>& config) {
  Ablation a;
  std::vector<double> dss_ga;
  std::vector<double> dss_random;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto ga = Run(X, space, f, g, config(r, SearchMode::kGa));
    const auto rnd = Run(X, space, f, g, config(r, SearchMode::kRandom));
    a.sur_ga += ga.metrics.sur() / 10.0;
    a.sur_random += rnd.metrics.sur() / 10.0;
    dss_ga.push_back(DssOrInf(ga.metrics));
    dss_random.push_back(DssOrInf(rnd.metrics));
  }
  a.cmp = CompareRuns(dss_ga, dss_random);
  a.pass = a.sur_ga >= 2.0 * a.sur_random && a.cmp.test.p < 0.05 && a.cmp.a12 <= 0.29;
  a.detail = Fmt("SUR ga %.3f vs random %.3f (x%.2f), MWU p %.2g, A12 %.3f", a.sur_ga, a.sur_random,
                 a.sur_random > 0 ? a.sur_ga / a.sur_random : std::numeric_limits<double>::infinity(), a.cmp.test.p,
                 a.cmp.a12);
  return a;
}

Outcome A4() {
  const auto f = PlantedModel();
  const auto X = PlantedDataset(500, 7, PlantedLabels::kBiased);
  SearchSpace space(PlantedSchema(), {"sex"});
  SurrogateExplainer g(PlantedSchema(), Perturbations(1000));
  const auto planted = CompareModes(X, space, *f, g, [](std::uint64_t r, SearchMode m) {
    return PlantedEngine(100, r, m);
  });
  Progress("planted ablation: " + planted.detail);

  const auto census = CensusDataset(3000, 1);
  TrainConfig tc;
  tc.hidden_layers = 3;
  tc.neurons = 64;
  tc.epochs = 20;
  tc.rng_seed = 3;
  const auto model = Train(census, tc);
  SearchSpace census_space(census.schema, {"sex"});
  SurrogateExplainer cg(census.schema, Perturbations(500));
  const auto mlp = CompareModes(census, census_space, *model.model, cg, [](std::uint64_t r, SearchMode m) {
    EngineConfig c;
    c.epsilon = 1;
    c.seed_num = 100;
    c.tsn_budget = 1000;
    c.max_generations = 100000;
    c.rng_seed = r;
    c.mode = m;
    return c;
  });
  Progress("census ablation: " + mlp.detail);
  return {planted.pass && mlp.pass, "planted: " + planted.detail + "; census MLP: " + mlp.detail};
}

// ---------------------------------------------------------------------------
// A5
// ---------------------------------------------------------------------------

FeatureSchema NumericSchema(std::size_t d, std::int64_t max) {
  FeatureSchema s;
  for (std::size_t i = 0; i < d; ++i) s.features.push_back({"x" + std::to_string(i), Numeric{0, max, 1}, std::nullopt});
  s.label_names = {"neg", "pos"};
  return s;
}

Outcome A5() {
  // Top-1 against the exact influence w_i (x_i - mean of the other grid values).
  const std::vector<double> w = {0.012, -0.004, 0.006, 0.02, -0.009, 0.001};
  const auto schema = NumericSchema(w.size(), 20);
  LambdaPredictor f(schema.label_names, [&](const Sample& x) {
    double p = 0.5;
    for (std::size_t i = 0; i < w.size(); ++i) p += w[i] * (static_cast<double>(std::get<NumericValue>(x[i]).value) - 10);
    return std::vector<double>{1 - p, p};
  });
  SurrogateExplainer g(schema, {});
  std::mt19937 rng(2024);
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    Sample x;
    for (std::size_t i = 0; i < w.size(); ++i) x.values.push_back(NumericValue{static_cast<int>(rng() % 21)});
    std::vector<double> truth;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double xi = static_cast<double>(std::get<NumericValue>(x[i]).value);
      truth.push_back(std::fabs(w[i] * (xi - (210.0 - xi) / 20.0)));
    }
    const double best = *std::max_element(truth.begin(), truth.end());
    const auto top = g.Explain(x, f, 1, static_cast<std::uint64_t>(t)).entries().front().index;
    agree += std::fabs(truth[top] - best) < 1e-12;
  }

  // Coefficients of a model that is exactly linear in the keep indicators.
  FeatureSchema cat;
  for (int i = 0; i < 5; ++i) {
    std::vector<std::string> domain;
    for (int k = 0; k < 16; ++k) domain.push_back("v" + std::to_string(k));
    cat.features.push_back({"c" + std::to_string(i), Categorical{domain}, std::nullopt});
  }
  cat.label_names = {"neg", "pos"};
  const std::vector<double> coef = {0.2, -0.1, 0.05, 0.15, -0.08};
  Sample x0;
  for (std::size_t k : {3u, 0u, 9u, 15u, 7u}) x0.values.push_back(CategoryRef{k});
  LambdaPredictor lin(cat.label_names, [&](const Sample& s) {
    double p = 0.45;
    for (std::size_t i = 0; i < 5; ++i) p += s[i] == x0[i] ? coef[i] : 0.0;
    return std::vector<double>{1 - p, p};
  });
  ExplainerConfig c;
  c.n_perturb = 5000;
  c.rng_seed = 17;
  const auto fitted = SurrogateCoefficients(x0, cat, lin, 1, c, 0);
  double worst = 0;
  for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::fabs(fitted[i] - coef[i]) / std::fabs(coef[i]));
  return {agree >= 95 && worst <= 1e-3,
          Fmt("top-1 agreement %d/100, worst relative coefficient error %.2e at n_perturb 5000", agree, worst)};
}

// ---------------------------------------------------------------------------
// A6
// ---------------------------------------------------------------------------

Outcome A6() {
  PlantedConfig pc;
  pc.region_weight = 0.16;
  const auto train = PlantedDataset(800, 11, PlantedLabels::kBiased, pc);
  const auto test = PlantedDataset(2000, 12, PlantedLabels::kBlind, pc);
  TrainConfig tc;
  tc.hidden_layers = 2;
  tc.neurons = 32;
  tc.epochs = 100;
  tc.learning_rate = 0.05;
  tc.rng_seed = 5;
  const auto before = Train(train, tc);
  SearchSpace space(train.schema, {"sex"});
  const auto xc = Perturbations(500);
  SurrogateExplainer g(train.schema, xc);
  EngineConfig ec;
  ec.epsilon = 2;
  ec.seed_num = 1000;
  ec.max_generations = 500;
  ec.rng_seed = 1;
  const auto run = Run(train, space, *before.model, g, ec);
  const auto count = AugmentationCount(train.size(), run.records.size(), 0.1, false);
  const auto split = SplitRecords(run.records, count, 9);
  RetrainConfig rc;
  rc.train = tc;
  rc.engine = ec;
  rc.explainer = xc;
  const auto rep = RetrainAndEvaluate(train, test, split.augmentation, split.holdout, *before.model, space, rc);
  const double fixed = 1.0 - rep.discriminatory_percentage.after;
  const double sur_before = rep.run_before.sur();
  const double sur_after = rep.run_after.sur();
  const double drop = sur_before > 0 ? 1.0 - sur_after / sur_before : 0.0;
  const double acc_shift = std::fabs(rep.normal_accuracy.after - rep.normal_accuracy.before);
  const bool ok = fixed >= 0.80 && drop >= 0.25 && acc_shift <= 0.02;
  return {ok, Fmt("%zu records added, %.1f%% of %zu held-out records fixed, SUR %.3f -> %.3f (drop %.0f%%), "
                  "accuracy %.4f -> %.4f",
                  rep.records_added, 100.0 * fixed, rep.holdout_size, sur_before, sur_after, 100.0 * drop,
                  rep.normal_accuracy.before, rep.normal_accuracy.after)};
}

// ---------------------------------------------------------------------------
// A7
// ---------------------------------------------------------------------------

double EnumeratedP(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0;
    double equal = 0;
    for (double v : pooled) {
      less += v < pooled[i];
      equal += v == pooled[i];
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double observed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += rank[i];
  const double center = static_cast<double>(a.size()) * static_cast<double>(n + 1) / 2.0;
  double extreme = 0;
  double total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sum += rank[i];
    }
    total += 1;
    extreme += std::fabs(sum - center) >= std::fabs(observed - center) - 1e-9;
  }
  return extreme / total;
}

double EnumeratedA12(const std::vector<double>& a, const std::vector<double>& b) {
  double wins = 0;
  for (double x : a) {
    for (double y : b) wins += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(a.size() * b.size());
}

Outcome A7() {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  auto check = [&](const std::vector<double>& a, const std::vector<double>& b) {
    ++cases;
    const auto r = MannWhitneyU(a, b);
    if (!r.exact || std::fabs(r.p - EnumeratedP(a, b)) > 1e-12 ||
        std::fabs(VarghaDelaneyA12(a, b) - EnumeratedA12(a, b)) > 1e-12) {
      ++mismatches;
    }
  };
  // Every split and every value pattern over {0, 1, 2} up to total size 6.
  for (std::size_t n = 2; n <= 6; ++n) {
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < n; ++i) patterns *= 3;
    for (std::size_t n1 = 1; n1 < n; ++n1) {
      for (std::size_t code = 0; code < patterns; ++code) {
        std::vector<double> a;
        std::vector<double> b;
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i, c /= 3) (i < n1 ? a : b).push_back(static_cast<double>(c % 3));
        check(a, b);
      }
    }
  }
  // Randomized suites for total sizes 7 to 10, with and without ties.
  std::mt19937 rng(7);
  for (int t = 0; t < 4000; ++t) {
    const std::size_t n = 7 + static_cast<std::size_t>(t % 4);
    const std::size_t n1 = 1 + rng() % (n - 1);
    const int range = t % 2 == 0 ? 4 : 1000;
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < n; ++i) (i < n1 ? a : b).push_back(static_cast<double>(rng() % range));
    check(a, b);
  }
  return {mismatches == 0, Fmt("%zu cases, %zu mismatches against enumeration", cases, mismatches)};
}

// ---------------------------------------------------------------------------
// A8
// ---------------------------------------------------------------------------

Outcome A8() {
  TempDir dir;
  bool ok = Shell(kCli + " synth --kind planted --rows 500 --seed 9 --out " + Q(dir / "p")) == 0;
  ok &= Shell(kCli + " test --data " + Q(dir / "p" / "data.csv") + " --model-file " + Q(dir / "p" / "model.json") +
              " --protected sex --epsilon 1 --seed-num 300 --generations 40 --seed 4 --out " + Q(dir / "a")) == 0;
  ok &= Shell(kCli + " test --config " + Q(dir / "a" / "run_config.json") + " --out " + Q(dir / "b")) == 0;
  ok &= Shell(kCli + " synth --kind census --rows 1200 --seed 2 --out " + Q(dir / "c")) == 0;
  ok &= Shell(kCli + " train --data " + Q(dir / "c" / "data.csv") + " --schema " + Q(dir / "c" / "schema.json") +
              " --model mlp --layers 2 --neurons 16 --epochs 5 --out " + Q(dir / "c" / "model.json")) == 0;
  ok &= Shell(kCli + " test --data " + Q(dir / "c" / "data.csv") + " --model-file " + Q(dir / "c" / "model.json") +
              " --protected sex,race --epsilon 4 --seed-num 50 --tsn-budget 2000 --n-perturb 300 --out " +
              Q(dir / "ca")) == 0;
  ok &= Shell(kCli + " test --config " + Q(dir / "ca" / "run_config.json") + " --out " + Q(dir / "cb")) == 0;
  if (!ok) return {false, "a CLI step failed"};
  const auto pa = ::fairga::testing::ReadFile(dir / "a" / "records.csv");
  const auto pb = ::fairga::testing::ReadFile(dir / "b" / "records.csv");
  const auto ca = ::fairga::testing::ReadFile(dir / "ca" / "records.csv");
  const auto cb = ::fairga::testing::ReadFile(dir / "cb" / "records.csv");
  const auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n') - 1; };
  return {pa == pb && ca == cb && lines(pa) > 0 && lines(ca) > 0,
          Fmt("planted %ld records %s, census MLP %ld records %s", static_cast<long>(lines(pa)),
              pa == pb ? "identical" : "DIFFER", static_cast<long>(lines(ca)), ca == cb ? "identical" : "DIFFER")};
}

// ---------------------------------------------------------------------------
// A9
// ---------------------------------------------------------------------------

Outcome A9() {
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond && std::find(failures.begin(), failures.end(), what) == failures.end()) failures.push_back(what);
  };
  const auto schema = CensusSchema();
  SearchSpace space(schema, {"sex", "race"});
  const auto sensitive = space.SensitivePositions(Sample{});
  std::size_t trials = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    for (int t = 0; t < 20; ++t, ++trials) {
      Population pop;
      const std::size_t n = 2 + UniformIndex(rng, 40);
      for (std::size_t i = 0; i < n; ++i) {
        pop.members.push_back({RandomSample(schema, rng), t % 5 == 0 ? 0.0 : Uniform01(rng), std::nullopt, 7});
      }
      const auto probs = SelectionProbabilities(pop);
      double sum = 0;
      bool nonneg = true;
      for (double p : probs) {
        sum += p;
        nonneg &= p >= 0;
      }
      expect(nonneg && std::fabs(sum - 1.0) <= 1e-12, "selection probabilities normalized");
      pop = Select(pop, rng);
      expect(pop.size() == n, "population size preserved");
      auto column = [&](const Population& p, std::size_t pos) {
        std::vector<Value> col;
        for (const auto& m : p.members) col.push_back(m.sample[pos]);
        std::sort(col.begin(), col.end());
        return col;
      };
      const auto before_cross = pop;
      Crossover(pop, Uniform01(rng), rng);
      expect(pop.size() == n, "population size preserved");
      for (std::size_t pos = 0; pos < schema.features.size(); ++pos) {
        expect(column(pop, pos) == column(before_cross, pos), "crossover conserves multisets");
      }
      const auto before_mut = pop;
      Mutate(pop, Uniform01(rng), space, nullptr, nullptr, rng);
      expect(pop.size() == n, "population size preserved");
      for (std::size_t i = 0; i < n; ++i) {
        for (auto pos : sensitive) expect(pop.members[i].sample[pos] == before_mut.members[i].sample[pos],
                                          "mutation keeps sensitive positions");
      }
    }
  }

  // DisSet only grows.
  const auto f = PlantedModel();
  const auto X = PlantedDataset(500, 7, PlantedLabels::kBiased);
  SearchSpace planted(PlantedSchema(), {"sex"});
  SurrogateExplainer g(PlantedSchema(), Perturbations(300));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EngineConfig c;
    c.epsilon = 1;
    c.seed_num = 200;
    c.max_generations = 30;
    c.rng_seed = seed;
    const auto r = Run(X, planted, *f, g, c);
    expect(std::is_sorted(r.dsn_history.begin(), r.dsn_history.end()) && r.dsn_history.back() == r.metrics.dsn,
           "DisSet monotone");
  }

  // Graph reachability against a Floyd-Warshall closure.
  std::mt19937 rng(5);
  std::size_t graphs = 0;
  for (int t = 0; t < 60; ++t, ++graphs) {
    const std::size_t nodes = 5 + rng() % 96;
    const std::size_t edges = nodes + rng() % (2 * nodes);
    auto name = [](std::size_t i) { return "w" + std::to_string(i); };
    const std::set<std::string> targets = {"w0", "w1", "w2"};
    KnowledgeGraph graph;
    const Relation walk[] = {Relation::kIsA, Relation::kRelatedTo, Relation::kHasA, Relation::kSimilarTo};
    std::vector<std::vector<std::size_t>> dist(nodes, std::vector<std::size_t>(nodes, SIZE_MAX));
    std::vector<bool> present(nodes, false);
    for (std::size_t i = 0; i < nodes; ++i) dist[i][i] = 0;
    for (std::size_t e = 0; e < edges; ++e) {
      const std::size_t a = rng() % nodes;
      const std::size_t b = rng() % nodes;
      if (a == b) continue;
      const bool distinct = rng() % 5 == 0;
      graph.AddEdge(name(a), distinct ? Relation::kDistinctFrom : walk[rng() % 4], name(b));
      present[a] = present[b] = true;
      if (!distinct) dist[a][b] = std::min<std::size_t>(dist[a][b], 1);
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = 0; j < nodes; ++j) {
          if (dist[i][k] != SIZE_MAX && dist[k][j] != SIZE_MAX) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
        }
      }
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      if (!present[i]) continue;
      std::optional<std::string> want;
      std::size_t best = SIZE_MAX;
      for (std::size_t tgt = 0; tgt < 3 && tgt < nodes; ++tgt) {
        if (dist[i][tgt] < best) {
          best = dist[i][tgt];
          want = name(tgt);
        }
      }
      expect(IsSensitive(name(i), targets, graph) == want, "graph reachability matches closure");
    }
  }
  return {failures.empty(),
          failures.empty() ? Fmt("%zu operator trials, 5 runs, %zu random graphs", trials, graphs)
                           : "violated: " + std::accumulate(std::next(failures.begin()), failures.end(), failures[0],
                                                            [](std::string a, const std::string& b) {
                                                              return a + "; " + b;
                                                            })};
}

}  // namespace
}  // namespace fairga

int main(int argc, char** argv) {
  using namespace fairga;
  const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome()>>>> criteria = {
      {"A1", {"metric arithmetic", A1}},   {"A2", {"soundness", A2}},
      {"A3", {"oracle completeness", A3}}, {"A4", {"GA dominance", A4}},
      {"A5", {"explainer fidelity", A5}},  {"A6", {"retraining effect", A6}},
      {"A7", {"statistics oracle", A7}},   {"A8", {"determinism", A8}},
      {"A9", {"invariant suite", A9}},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && only.count(id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all_pass &= o.pass;
    std::cout << id << " " << (o.pass ? "PASS" : "FAIL") << " " << entry.first << ": " << o.detail
              << Fmt(" [%.1fs]", secs) << std::endl;
  }
  return all_pass ? 0 : 1;
}
