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

// fairga command-line tool.
//
// Exit codes: 0 success, 1 configuration or input error, 2 adapter/protocol
// or file-system failure, 3 records that fail re-verification.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/engine.hpp"
#include "fairga/explain.hpp"
#include "fairga/external.hpp"
#include "fairga/knowledge.hpp"
#include "fairga/metrics.hpp"
#include "fairga/model.hpp"
#include "fairga/records.hpp"
#include "fairga/retrain.hpp"
#include "fairga/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace fairga {
namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitUnverified = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kAdapterDown:
    case ErrorCode::kProtocolViolation:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

void Log(const std::string& message) { std::cerr << "fairga: " << message << "\n"; }

std::set<std::string> SplitList(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = Trim(item);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

std::string Absolute(const std::string& path) {
  if (path.empty()) return path;
  return fs::absolute(path).lexically_normal().string();
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Model and knowledge loading shared by several subcommands
// ---------------------------------------------------------------------------

struct ModelHandle {
  FeatureSchema schema;
  std::unique_ptr<Predictor> predictor;
};

ModelHandle OpenModel(const std::string& model_file, const std::string& external,
                      const std::optional<FeatureSchema>& schema) {
  if (model_file.empty() == external.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --model-file and --external");
  }
  ModelHandle h;
  if (!model_file.empty()) {
    auto loaded = LoadModel(model_file);
    if (schema && SchemaToJson(*schema)["features"] != SchemaToJson(loaded.schema)["features"]) {
      throw Error(ErrorCode::kInvalidSchema, "the model was trained on a different feature schema");
    }
    h.schema = schema ? *schema : loaded.schema;
    h.predictor = std::move(loaded.predictor);
    return h;
  }
  if (!schema) throw Error(ErrorCode::kInvalidArgument, "--external needs --schema");
  h.schema = *schema;
  h.predictor = ExternalPredictor::Open(external, *schema);
  return h;
}

struct Knowledge {
  std::optional<KnowledgeGraph> graph;
  std::optional<EmbeddingStore> embeddings;
};

Knowledge LoadKnowledge(const ordered_json& cfg, const Dataset& X) {
  Knowledge k;
  const auto graph_path = cfg.value("graph", std::string());
  const auto emb_path = cfg.value("embeddings", std::string());
  if (!emb_path.empty()) k.embeddings = LoadEmbeddings(emb_path);
  if (graph_path.empty()) return k;
  k.graph = LoadGraph(graph_path);
  if (k.embeddings && cfg.value("expand", false)) {
    std::set<std::string> vocab;
    for (const auto& s : X.samples) {
      for (const auto& v : s.values) vocab.insert(std::get<TokenWord>(v).text);
    }
    auto result = ExpandWithEmbeddings(*k.graph, *k.embeddings, {vocab.begin(), vocab.end()},
                                       cfg.value("expand_threshold", 0.7));
    Log("knowledge graph expanded by " + std::to_string(result.edges_added) + " edges (" +
        std::to_string(result.oov_skipped) + " words not embedded)");
    k.graph = std::move(result.graph);
  }
  return k;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string schema;
  std::string model = "mlp";
  std::uint64_t seed = 0;
  std::string out;
  std::size_t layers = 5;
  std::size_t neurons = 128;
  std::size_t epochs = 20;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t vocab_size = 5000;
  double test_fraction = 0.0;
};

ModelKind ParseModelKind(const std::string& name) {
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "bow") return ModelKind::kTextBow;
  throw Error(ErrorCode::kInvalidArgument, "unknown model kind '" + name + "'");
}

TrainConfig MakeTrainConfig(const TrainArgs& a) {
  TrainConfig c;
  c.kind = ParseModelKind(a.model);
  c.hidden_layers = a.layers;
  c.neurons = a.neurons;
  c.epochs = a.epochs;
  c.learning_rate = a.learning_rate;
  c.batch_size = a.batch_size;
  c.vocab_size = a.vocab_size;
  c.rng_seed = a.seed;
  return c;
}

int CmdTrain(const TrainArgs& a) {
  const auto schema = LoadSchema(a.schema);
  auto ds = LoadDataset(a.data, schema);
  Dataset train = ds;
  std::optional<Dataset> test;
  if (a.test_fraction > 0.0) {
    auto split = StratifiedSplit(ds, a.test_fraction, a.seed);
    train = std::move(split.train);
    test = std::move(split.test);
  }
  auto result = Train(train, MakeTrainConfig(a));
  if (fs::path(a.out).has_parent_path()) EnsureDir(fs::path(a.out).parent_path());
  SaveModel(*result.model, a.out);
  std::cout << "train_accuracy " << result.train_accuracy << "\n";
  if (test) std::cout << "test_accuracy " << Accuracy(*result.model, *test) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

struct TestArgs {
  std::string config;
  std::string data;
  std::string schema;
  std::string model_file;
  std::string external;
  std::string protected_attrs;
  std::string epsilon = "auto";
  std::optional<double> cr;
  std::optional<double> mr;
  std::optional<std::size_t> generations;
  std::optional<double> budget_seconds;
  std::optional<std::size_t> tsn_budget;
  std::string mode = "ga";
  std::uint64_t seed = 0;
  std::string out;
  std::size_t workers = 1;
  std::size_t seed_num = 1000;
  std::size_t k = 20;
  std::size_t n_perturb = 1000;
  std::string graph;
  std::string embeddings;
  bool expand = false;
};

// Effective parameters of a run; what run_config.json stores.
ordered_json TestConfigFromArgs(const TestArgs& a) {
  ordered_json c;
  c["data"] = Absolute(a.data);
  c["schema_file"] = Absolute(a.schema);
  c["model_file"] = Absolute(a.model_file);
  c["external"] = a.external;
  c["protected"] = a.protected_attrs.empty() ? ordered_json(nullptr) : ordered_json(SplitList(a.protected_attrs));
  c["epsilon"] = a.epsilon;
  c["cr"] = a.cr ? ordered_json(*a.cr) : ordered_json(nullptr);
  c["mr"] = a.mr ? ordered_json(*a.mr) : ordered_json(nullptr);
  c["generations"] = a.generations ? ordered_json(*a.generations) : ordered_json(nullptr);
  c["budget_seconds"] = a.budget_seconds ? ordered_json(*a.budget_seconds) : ordered_json(nullptr);
  c["tsn_budget"] = a.tsn_budget ? ordered_json(*a.tsn_budget) : ordered_json(nullptr);
  c["mode"] = a.mode;
  c["seed"] = a.seed;
  c["workers"] = a.workers;
  c["seed_num"] = a.seed_num;
  c["k"] = a.k;
  c["n_perturb"] = a.n_perturb;
  c["graph"] = Absolute(a.graph);
  c["embeddings"] = Absolute(a.embeddings);
  c["expand"] = a.expand;
  c["expand_threshold"] = 0.7;
  return c;
}

template <typename T>
std::optional<T> OptionalField(const ordered_json& c, const char* key) {
  if (!c.contains(key) || c.at(key).is_null()) return std::nullopt;
  return c.at(key).get<T>();
}

int RunTest(ordered_json cfg, const fs::path& out_dir) {
  std::optional<FeatureSchema> schema;
  if (cfg.contains("schema") && cfg["schema"].is_object()) {
    schema = SchemaFromJson(cfg["schema"]);
  } else if (!cfg.value("schema_file", std::string()).empty()) {
    schema = LoadSchema(cfg["schema_file"].get<std::string>());
  }
  auto model = OpenModel(cfg.value("model_file", std::string()), cfg.value("external", std::string()), schema);
  const FeatureSchema& sch = model.schema;
  const Dataset X = LoadDataset(cfg.at("data").get<std::string>(), sch);

  std::set<std::string> protected_attrs = sch.protected_attrs;
  if (auto p = OptionalField<std::set<std::string>>(cfg, "protected")) protected_attrs = *p;
  if (protected_attrs.empty()) throw Error(ErrorCode::kInvalidArgument, "no protected attributes (use --protected)");

  const bool text = sch.IsText();
  EngineConfig ec;
  ec.cr = OptionalField<double>(cfg, "cr").value_or(text ? 0.5 : 0.9);
  ec.mr = OptionalField<double>(cfg, "mr").value_or(0.05);
  ec.max_generations = OptionalField<std::size_t>(cfg, "generations");
  ec.time_budget = OptionalField<double>(cfg, "budget_seconds");
  ec.tsn_budget = OptionalField<std::size_t>(cfg, "tsn_budget");
  if (!ec.max_generations && !ec.time_budget && !ec.tsn_budget) {
    if (text) {
      ec.max_generations = 20;
    } else {
      ec.time_budget = 3600.0;
    }
  }
  const auto mode = cfg.value("mode", std::string("ga"));
  if (mode != "ga" && mode != "random") throw Error(ErrorCode::kInvalidArgument, "--mode must be ga or random");
  ec.mode = mode == "ga" ? SearchMode::kGa : SearchMode::kRandom;
  ec.rng_seed = cfg.value("seed", std::uint64_t{0});
  ec.workers = cfg.value("workers", std::size_t{1});
  ec.seed_num = cfg.value("seed_num", std::size_t{1000});
  ec.k = cfg.value("k", std::size_t{20});

  ExplainerConfig xc;
  xc.n_perturb = cfg.value("n_perturb", std::size_t{1000});
  xc.rng_seed = ec.rng_seed;

  auto knowledge = LoadKnowledge(cfg, X);
  if (text && !knowledge.graph) throw Error(ErrorCode::kInvalidArgument, "text data needs --graph");
  SearchSpace space(sch, protected_attrs, knowledge.graph ? &*knowledge.graph : nullptr,
                    knowledge.embeddings ? &*knowledge.embeddings : nullptr);
  SurrogateExplainer g(sch, xc);

  const auto eps = cfg.at("epsilon");
  if (eps.is_string() && eps.get<std::string>() == "auto") {
    ec.epsilon = AutoEpsilon(X, space, *model.predictor, g, ec.rng_seed, 100, ec.workers);
    Log("auto epsilon = " + std::to_string(ec.epsilon));
  } else if (eps.is_number_unsigned()) {
    ec.epsilon = eps.get<std::size_t>();
  } else {
    const auto text_eps = eps.is_string() ? eps.get<std::string>() : eps.dump();
    std::size_t value = 0;
    auto [ptr, err] = std::from_chars(text_eps.data(), text_eps.data() + text_eps.size(), value);
    if (err != std::errc() || ptr != text_eps.data() + text_eps.size()) {
      throw Error(ErrorCode::kInvalidArgument, "--epsilon must be a positive integer or 'auto'");
    }
    ec.epsilon = value;
  }
  ec.Validate();

  // Everything a re-run needs, with budgets and epsilon resolved.
  cfg["schema"] = SchemaToJson(sch);
  cfg["protected"] = protected_attrs;
  cfg["epsilon"] = ec.epsilon;
  cfg["cr"] = ec.cr;
  cfg["mr"] = ec.mr;
  cfg["generations"] = ec.max_generations ? ordered_json(*ec.max_generations) : ordered_json(nullptr);
  cfg["budget_seconds"] = ec.time_budget ? ordered_json(*ec.time_budget) : ordered_json(nullptr);
  cfg["tsn_budget"] = ec.tsn_budget ? ordered_json(*ec.tsn_budget) : ordered_json(nullptr);
  EnsureDir(out_dir);
  WriteJson(cfg, out_dir / "run_config.json");

  const auto result = Run(X, space, *model.predictor, g, ec);
  WriteRecords(result.records, sch, out_dir / "records.csv");
  auto metrics = MetricsToJson(result.metrics);
  metrics["mode"] = mode;
  metrics["epsilon"] = result.epsilon;
  metrics["seeds"] = result.seeds;
  metrics["generations"] = result.generations;
  metrics["model_queries"] = result.model_queries;
  metrics["dsn_history"] = result.dsn_history;
  WriteJson(metrics, out_dir / "metrics.json");
  std::cout << "tsn " << result.metrics.tsn << " dsn " << result.metrics.dsn << " sur " << result.metrics.sur()
            << " dss " << FormatDss(result.metrics.dss()) << "\n";
  return 0;
}

int CmdTest(const TestArgs& a) {
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  if (!a.config.empty()) {
    auto raw = ReadJsonFile(a.config);
    ordered_json cfg = ordered_json::parse(raw.dump());
    return RunTest(std::move(cfg), a.out);
  }
  if (a.data.empty()) throw Error(ErrorCode::kInvalidArgument, "--data is required");
  return RunTest(TestConfigFromArgs(a), a.out);
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

struct ExplainArgs {
  std::string data;
  std::string schema;
  std::string model_file;
  std::string external;
  std::size_t index = 0;
  std::size_t n_perturb = 1000;
  std::uint64_t seed = 0;
  std::string label;
};

int CmdExplain(const ExplainArgs& a) {
  std::optional<FeatureSchema> schema;
  if (!a.schema.empty()) schema = LoadSchema(a.schema);
  auto model = OpenModel(a.model_file, a.external, schema);
  const auto X = LoadDataset(a.data, model.schema);
  if (a.index >= X.size()) {
    throw Error(ErrorCode::kInvalidArgument, "--index " + std::to_string(a.index) + " is past the last row");
  }
  const auto& x = X.samples[a.index];
  std::size_t target = model.predictor->PredictLabel(x);
  if (!a.label.empty()) {
    const auto idx = model.schema.LabelIndex(a.label);
    if (!idx) throw Error(ErrorCode::kInvalidArgument, "unknown label '" + a.label + "'");
    target = *idx;
  }
  ExplainerConfig xc;
  xc.n_perturb = a.n_perturb;
  xc.rng_seed = a.seed;
  SurrogateExplainer g(model.schema, xc);
  const auto e = g.Explain(x, *model.predictor, target, a.index);
  std::cout << "label " << model.schema.label_names[target] << "\n";
  std::size_t rank = 1;
  for (const auto& entry : e.entries()) {
    const auto& spec = SpecAt(model.schema, entry.index);
    const auto name = model.schema.IsText() ? "#" + std::to_string(entry.index) : spec.name;
    std::cout << rank++ << "\t" << name << "\t" << FormatValue(x[entry.index], spec) << "\t" << entry.score << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// retrain
// ---------------------------------------------------------------------------

struct RetrainArgs {
  TrainArgs train;
  std::string records;
  std::string model_file;
  std::string protected_attrs;
  std::string graph;
  double fraction = 0.1;
  std::string policy = "majority";
  std::size_t epsilon = 1;
  std::size_t generations = 100;
  std::size_t seed_num = 1000;
  std::size_t n_perturb = 1000;
  double test_fraction = 0.2;
};

int CmdRetrain(const RetrainArgs& a) {
  if (a.train.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  auto schema = LoadSchema(a.train.schema);
  if (!a.protected_attrs.empty()) schema.protected_attrs = SplitList(a.protected_attrs);
  const auto ds = LoadDataset(a.train.data, schema);
  auto split = StratifiedSplit(ds, a.test_fraction, a.train.seed);

  RetrainConfig rc;
  rc.train = MakeTrainConfig(a.train);
  rc.policy = a.policy == "original" ? LabelPolicy::kOriginal : LabelPolicy::kMajority;
  if (a.policy != "original" && a.policy != "majority") {
    throw Error(ErrorCode::kInvalidArgument, "--policy must be majority or original");
  }
  rc.engine.epsilon = a.epsilon;
  rc.engine.max_generations = a.generations;
  rc.engine.seed_num = a.seed_num;
  rc.engine.rng_seed = a.train.seed;
  if (schema.IsText()) rc.engine.cr = 0.5;
  rc.explainer.n_perturb = a.n_perturb;
  rc.explainer.rng_seed = a.train.seed;

  std::unique_ptr<Predictor> before;
  if (!a.model_file.empty()) {
    before = OpenModel(a.model_file, "", schema).predictor;
  } else {
    before = Train(split.train, rc.train).model;
  }
  std::optional<KnowledgeGraph> graph;
  if (!a.graph.empty()) graph = LoadGraph(a.graph);
  if (schema.IsText() && !graph) throw Error(ErrorCode::kInvalidArgument, "text data needs --graph");
  SearchSpace space(schema, schema.protected_attrs, graph ? &*graph : nullptr);

  auto records = ReadRecords(a.records, schema);
  const std::size_t count =
      schema.IsText() ? (records.size() + 1) / 2
                      : AugmentationCount(split.train.size(), records.size(), a.fraction, false);
  auto parts = SplitRecords(std::move(records), count, a.train.seed);
  const auto report = RetrainAndEvaluate(split.train, split.test, parts.augmentation, parts.holdout, *before, space, rc);
  EnsureDir(a.train.out);
  auto j = FairnessReportToJson(report);
  j["fraction"] = a.fraction;
  j["policy"] = a.policy;
  j["seed"] = a.train.seed;
  WriteJson(j, fs::path(a.train.out) / "fairness_report.json");
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare / report / verify
// ---------------------------------------------------------------------------

// Per-run DSS; a run without findings counts as infinitely slow.
std::vector<double> DssOfRuns(const std::vector<std::string>& dirs) {
  std::vector<double> out;
  for (const auto& d : dirs) {
    const auto m = ReadMetrics(fs::path(d) / "metrics.json");
    out.push_back(m.dss().value_or(std::numeric_limits<double>::infinity()));
  }
  return out;
}

int CmdCompare(const std::vector<std::string>& runs_a, const std::vector<std::string>& runs_b,
               const std::string& out) {
  auto c = CompareRuns(DssOfRuns(runs_a), DssOfRuns(runs_b));
  auto j = ComparisonToJson(c);
  auto finite = [](const std::vector<double>& v) {
    auto arr = ordered_json::array();
    for (double d : v) arr.push_back(std::isfinite(d) ? ordered_json(d) : ordered_json(nullptr));
    return arr;
  };
  j["dss_a"] = finite(c.dss_a);
  j["dss_b"] = finite(c.dss_b);
  EnsureDir(out);
  WriteJson(j, fs::path(out) / "comparison.json");
  std::cout << "u " << c.test.u << " p " << c.test.p << " a12 " << c.a12 << "\n";
  return 0;
}

int CmdReport(const std::vector<std::string>& runs, const std::string& out) {
  EnsureDir(out);
  std::ofstream summary(fs::path(out) / "summary.csv");
  if (!summary) throw Error(ErrorCode::kIo, "cannot write summary.csv");
  summary << "run,mode,tsn,dsn,elapsed,dss,sur\n";
  std::vector<Sample> samples;
  std::vector<std::string> labels;
  std::optional<FeatureSchema> schema;
  for (const auto& dir : runs) {
    const fs::path d(dir);
    const auto cfg = ReadJsonFile(d / "run_config.json");
    const auto m = ReadMetrics(d / "metrics.json");
    const auto run_schema = SchemaFromJson(cfg.at("schema"));
    if (schema && SchemaToJson(*schema) != SchemaToJson(run_schema)) {
      throw Error(ErrorCode::kInvalidArgument, dir + " uses a different schema");
    }
    schema = run_schema;
    auto name = d.filename().string();
    if (name.empty()) name = d.parent_path().filename().string();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.6f,%s,%.6f", m.tsn, m.dsn, m.elapsed, FormatDss(m.dss()).c_str(),
                  m.sur());
    summary << detail::QuoteCsv(name) << "," << cfg.value("mode", std::string("ga")) << "," << buf << "\n";
    for (auto& r : ReadRecords(d / "records.csv", run_schema)) {
      samples.push_back(std::move(r.sample));
      labels.push_back(name);
    }
  }
  if (samples.size() >= 3) {
    const auto proj = PcaProject(EncodeForProjection(samples, *schema));
    if (proj.degenerate) Log("records span fewer than two dimensions; missing coordinates are 0");
    std::vector<LabeledPoint> points;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      points.push_back({proj.points[i][0], proj.points[i][1], labels[i]});
    }
    WriteDiversityCsv(points, fs::path(out) / "diversity.csv");
  } else {
    Log("fewer than 3 records; diversity.csv not written");
  }
  return 0;
}

int CmdVerify(const std::string& run_dir, const std::string& model_file) {
  const fs::path d(run_dir);
  const auto cfg = ReadJsonFile(d / "run_config.json");
  const auto path = model_file.empty() ? cfg.value("model_file", std::string()) : model_file;
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "no model file to verify against");
  auto loaded = LoadModel(path);
  auto schema = SchemaFromJson(cfg.at("schema"));
  schema.protected_attrs = cfg.at("protected").get<std::set<std::string>>();
  const auto records = ReadRecords(d / "records.csv", schema);
  const auto summary = RecheckRecords(records, *loaded.predictor, schema);
  std::cout << "verified " << summary.verified << "/" << summary.total << "\n";
  for (auto i : summary.failed) std::cout << "failed record " << i << "\n";
  return summary.all_verified() ? 0 : kExitUnverified;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int CmdSynth(const std::string& kind, std::size_t rows, std::uint64_t seed, const std::string& out) {
  EnsureDir(out);
  const fs::path d(out);
  Dataset ds;
  if (kind == "planted") {
    ds = PlantedDataset(rows, seed, PlantedLabels::kBiased);
    SaveModel(*PlantedModel(), d / "model.json");
  } else if (kind == "census") {
    ds = CensusDataset(rows, seed);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--kind must be planted or census");
  }
  SaveSchema(ds.schema, d / "schema.json");
  SaveTabular(ds, d / "data.csv");
  std::cout << "wrote " << ds.size() << " rows to " << (d / "data.csv").string() << "\n";
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Explanation-guided genetic search for individual discrimination"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train a built-in classifier");
  auto add_train_opts = [](CLI::App* c, TrainArgs& t, bool need_out_file) {
    c->add_option("--data", t.data, "CSV file or text corpus")->required();
    c->add_option("--schema", t.schema, "Schema JSON")->required();
    c->add_option("--model", t.model, "logistic | mlp | bow");
    c->add_option("--seed", t.seed, "Random seed");
    auto* o = c->add_option("--out", t.out, need_out_file ? "Model file to write" : "Output directory");
    if (need_out_file) o->required();
    c->add_option("--layers", t.layers, "Hidden layers (mlp)");
    c->add_option("--neurons", t.neurons, "Neurons per hidden layer (mlp)");
    c->add_option("--epochs", t.epochs, "Training epochs");
    c->add_option("--lr", t.learning_rate, "Learning rate");
    c->add_option("--batch-size", t.batch_size, "Minibatch size");
    c->add_option("--vocab-size", t.vocab_size, "Vocabulary size (bow)");
  };
  add_train_opts(cmd_train, train, true);
  cmd_train->add_option("--test-fraction", train.test_fraction, "Held-out fraction for a test accuracy");

  TestArgs test;
  auto* cmd_test = app.add_subcommand("test", "Search for discriminatory samples");
  cmd_test->add_option("--config", test.config, "Re-run from a run_config.json");
  cmd_test->add_option("--data", test.data, "CSV file or text corpus");
  cmd_test->add_option("--schema", test.schema, "Schema JSON (defaults to the model's)");
  cmd_test->add_option("--model-file", test.model_file, "Built-in model file");
  cmd_test->add_option("--external", test.external, "Adapter command, or tcp://host:port");
  cmd_test->add_option("--protected", test.protected_attrs, "Comma-separated protected attributes");
  cmd_test->add_option("--epsilon", test.epsilon, "Rank threshold, or 'auto'");
  cmd_test->add_option("--cr", test.cr, "Crossover rate");
  cmd_test->add_option("--mr", test.mr, "Mutation rate");
  cmd_test->add_option("--generations", test.generations, "Generation budget");
  cmd_test->add_option("--budget-seconds", test.budget_seconds, "Wall-clock budget");
  cmd_test->add_option("--tsn-budget", test.tsn_budget, "Budget of discriminatory checks");
  cmd_test->add_option("--mode", test.mode, "ga | random");
  cmd_test->add_option("--seed", test.seed, "Random seed");
  cmd_test->add_option("--out", test.out, "Run directory")->required();
  cmd_test->add_option("--workers", test.workers, "Worker threads (1 is deterministic)");
  cmd_test->add_option("--seed-num", test.seed_num, "Maximum number of seeds");
  cmd_test->add_option("--k", test.k, "Text population fan-out");
  cmd_test->add_option("--n-perturb", test.n_perturb, "Explainer perturbations");
  cmd_test->add_option("--graph", test.graph, "Knowledge graph TSV (text)");
  cmd_test->add_option("--embeddings", test.embeddings, "Word embeddings (text)");
  cmd_test->add_flag("--expand", test.expand, "Expand the graph with embedding neighbours");

  ExplainArgs explain;
  auto* cmd_explain = app.add_subcommand("explain", "Print the ranked explanation of one row");
  cmd_explain->add_option("--data", explain.data, "CSV file or text corpus")->required();
  cmd_explain->add_option("--schema", explain.schema, "Schema JSON");
  cmd_explain->add_option("--model-file", explain.model_file, "Built-in model file");
  cmd_explain->add_option("--external", explain.external, "Adapter command, or tcp://host:port");
  cmd_explain->add_option("--index", explain.index, "Row index")->required();
  cmd_explain->add_option("--n-perturb", explain.n_perturb, "Perturbations");
  cmd_explain->add_option("--seed", explain.seed, "Random seed");
  cmd_explain->add_option("--label", explain.label, "Explained label (default: predicted)");

  RetrainArgs retrain;
  auto* cmd_retrain = app.add_subcommand("retrain", "Augment, retrain and compare");
  add_train_opts(cmd_retrain, retrain.train, false);
  cmd_retrain->get_option("--out")->required();
  cmd_retrain->add_option("--records", retrain.records, "records.csv of a run")->required();
  cmd_retrain->add_option("--fraction", retrain.fraction, "Records added, as a fraction of the training set");
  cmd_retrain->add_option("--model-file", retrain.model_file, "Model under repair (default: train one)");
  cmd_retrain->add_option("--protected", retrain.protected_attrs, "Comma-separated protected attributes");
  cmd_retrain->add_option("--graph", retrain.graph, "Knowledge graph TSV (text)");
  cmd_retrain->add_option("--policy", retrain.policy, "majority | original");
  cmd_retrain->add_option("--epsilon", retrain.epsilon, "Epsilon of the evaluation runs");
  cmd_retrain->add_option("--generations", retrain.generations, "Generations of the evaluation runs");
  cmd_retrain->add_option("--seed-num", retrain.seed_num, "Seeds of the evaluation runs");
  cmd_retrain->add_option("--n-perturb", retrain.n_perturb, "Explainer perturbations");
  cmd_retrain->add_option("--test-fraction", retrain.test_fraction, "Held-out fraction for accuracy");

  std::vector<std::string> runs_a;
  std::vector<std::string> runs_b;
  std::string compare_out = ".";
  auto* cmd_compare = app.add_subcommand("compare", "Compare the DSS of two groups of runs");
  cmd_compare->add_option("--runs-a", runs_a, "Run directories of approach A")->required();
  cmd_compare->add_option("--runs-b", runs_b, "Run directories of approach B")->required();
  cmd_compare->add_option("--out", compare_out, "Output directory");

  std::vector<std::string> report_runs;
  std::string report_out = ".";
  auto* cmd_report = app.add_subcommand("report", "Summarize runs and project their records");
  cmd_report->add_option("--runs", report_runs, "Run directories")->required();
  cmd_report->add_option("--out", report_out, "Output directory");

  std::string verify_run;
  std::string verify_model;
  auto* cmd_verify = app.add_subcommand("verify", "Re-check every record of a run against a model file");
  cmd_verify->add_option("--run", verify_run, "Run directory")->required();
  cmd_verify->add_option("--model-file", verify_model, "Model file (default: the run's)");

  std::string synth_kind = "planted";
  std::size_t synth_rows = 1000;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic dataset");
  cmd_synth->add_option("--kind", synth_kind, "planted | census");
  cmd_synth->add_option("--rows", synth_rows, "Rows");
  cmd_synth->add_option("--seed", synth_seed, "Random seed");
  cmd_synth->add_option("--out", synth_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*cmd_train) return CmdTrain(train);
    if (*cmd_test) return CmdTest(test);
    if (*cmd_explain) return CmdExplain(explain);
    if (*cmd_retrain) return CmdRetrain(retrain);
    if (*cmd_compare) return CmdCompare(runs_a, runs_b, compare_out);
    if (*cmd_report) return CmdReport(report_runs, report_out);
    if (*cmd_verify) return CmdVerify(verify_run, verify_model);
    if (*cmd_synth) return CmdSynth(synth_kind, synth_rows, synth_seed, synth_out);
  } catch (const Error& e) {
    Log(e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    Log(e.what());
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace
}  // namespace fairga

int main(int argc, char** argv) { return fairga::Main(argc, argv); }
