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

// The black-box classifier interface and the built-in trainable models.
//
// Every model is reached only through Predictor::PredictProba, which returns
// a probability vector over labels(). Built-in models are immutable after
// training and may be queried from many threads at once.

#ifndef FAIRGA_MODEL_HPP_
#define FAIRGA_MODEL_HPP_

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/rng.hpp"
#include "json.hpp"

namespace fairga {

class Predictor {
 public:
  explicit Predictor(std::vector<std::string> labels) : labels_(std::move(labels)) {}
  virtual ~Predictor() = default;

  Predictor(const Predictor&) = delete;
  Predictor& operator=(const Predictor&) = delete;

  const std::vector<std::string>& labels() const { return labels_; }

  std::vector<double> PredictProba(const Sample& sample) const {
    queries_.fetch_add(1, std::memory_order_relaxed);
    return DoPredict(sample);
  }

  // argmax of PredictProba; ties resolve to the lowest label index.
  std::size_t PredictLabel(const Sample& sample) const {
    const auto p = PredictProba(sample);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  std::uint64_t query_count() const { return queries_.load(std::memory_order_relaxed); }

  // Model-file representation; only persistable models override this.
  virtual nlohmann::ordered_json ToJson() const {
    throw Error(ErrorCode::kInvalidArgument, "this predictor cannot be saved");
  }

 protected:
  virtual std::vector<double> DoPredict(const Sample& sample) const = 0;

 private:
  std::vector<std::string> labels_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

// Wraps a callable; used for stubs and analytic benchmark classifiers.
class LambdaPredictor : public Predictor {
 public:
  using Fn = std::function<std::vector<double>(const Sample&)>;

  LambdaPredictor(std::vector<std::string> labels, Fn fn)
      : Predictor(std::move(labels)), fn_(std::move(fn)) {}

 protected:
  std::vector<double> DoPredict(const Sample& sample) const override { return fn_(sample); }

 private:
  Fn fn_;
};

inline std::vector<double> Softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  e /= e.sum();
  return {e.data(), e.data() + e.size()};
}

// ---------------------------------------------------------------------------
// Input encodings
// ---------------------------------------------------------------------------

// Bag-of-words presence vector over a fixed vocabulary. Multi-word token
// values ("male master") contribute each of their words.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  }

  // The `max_size` most frequent words (ties in lexicographic order).
  static Vocabulary Build(const std::vector<Sample>& docs, std::size_t max_size) {
    std::map<std::string, std::size_t> counts;
    for (const auto& d : docs) {
      for (const auto& v : d.values) {
        ForEachWord(std::get<TokenWord>(v).text, [&](const std::string& w) { ++counts[w]; });
      }
    }
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> words;
    for (std::size_t i = 0; i < sorted.size() && i < max_size; ++i) words.push_back(sorted[i].first);
    return Vocabulary(std::move(words));
  }

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  void EncodeInto(const Sample& s, Eigen::Ref<Eigen::VectorXd> out) const {
    out.setZero();
    for (const auto& v : s.values) {
      ForEachWord(std::get<TokenWord>(v).text, [&](const std::string& w) {
        if (auto it = index_.find(w); it != index_.end()) out[static_cast<Eigen::Index>(it->second)] = 1.0;
      });
    }
  }

 private:
  template <typename F>
  static void ForEachWord(const std::string& text, F&& f) {
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t j = text.find(' ', i);
      if (j == std::string::npos) j = text.size();
      if (j > i) f(text.substr(i, j - i));
      i = j + 1;
    }
  }

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Dense softmax network (logistic regression is the zero-hidden-layer case)
// ---------------------------------------------------------------------------

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

enum class ModelKind { kLogistic, kMlp, kTextBow };

inline const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kTextBow: return "bow";
  }
  return "unknown";
}

class NeuralModel : public Predictor {
 public:
  NeuralModel(ModelKind kind, FeatureSchema schema, Vocabulary vocab, std::vector<DenseLayer> layers)
      : Predictor(schema.label_names),
        kind_(kind),
        schema_(std::move(schema)),
        vocab_(std::move(vocab)),
        layers_(std::move(layers)) {}

  // Binary or multinomial logistic model with known weights over the schema
  // encoding: one row of `weights` and one bias per label.
  static std::unique_ptr<NeuralModel> Logistic(FeatureSchema schema, Eigen::MatrixXd weights,
                                               Eigen::VectorXd bias) {
    std::vector<DenseLayer> layers{{std::move(weights), std::move(bias)}};
    return std::make_unique<NeuralModel>(ModelKind::kLogistic, std::move(schema), Vocabulary{},
                                         std::move(layers));
  }

  ModelKind kind() const { return kind_; }
  const FeatureSchema& schema() const { return schema_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t InputDimension() const { return static_cast<std::size_t>(layers_.front().weights.cols()); }

  Eigen::VectorXd EncodeInput(const Sample& s) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(InputDimension()));
    if (schema_.IsText()) {
      vocab_.EncodeInto(s, x);
    } else {
      EncodeInto(s, schema_, std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
    }
    return x;
  }

  std::vector<double> PredictEncoded(const Eigen::VectorXd& x) const {
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::VectorXd z = layers_[l].weights * a + layers_[l].bias;
      a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }
    return Softmax(a);
  }

  nlohmann::ordered_json ToJson() const override {
    nlohmann::ordered_json j;
    j["format"] = "fairga-model";
    j["version"] = 1;
    j["kind"] = ModelKindName(kind_);
    j["schema"] = SchemaToJson(schema_);
    if (schema_.IsText()) j["vocab"] = vocab_.words();
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& layer : layers_) {
      nlohmann::ordered_json lj;
      lj["rows"] = layer.weights.rows();
      lj["cols"] = layer.weights.cols();
      std::vector<double> w(static_cast<std::size_t>(layer.weights.size()));
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), layer.weights.rows(), layer.weights.cols()) = layer.weights;
      lj["w"] = w;
      lj["b"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
      j["layers"].push_back(std::move(lj));
    }
    return j;
  }

 protected:
  std::vector<double> DoPredict(const Sample& sample) const override {
    return PredictEncoded(EncodeInput(sample));
  }

 private:
  ModelKind kind_;
  FeatureSchema schema_;
  Vocabulary vocab_;
  std::vector<DenseLayer> layers_;
};

// ---------------------------------------------------------------------------
// Lookup-table model over a small discrete tabular space
// ---------------------------------------------------------------------------

// Stores one probability vector per grid point. Meant for synthetic
// benchmarks whose decision function is known in closed form.
class TableModel : public Predictor {
 public:
  static constexpr std::size_t kMaxCells = std::size_t{1} << 22;

  TableModel(FeatureSchema schema, std::vector<std::vector<double>> probs)
      : Predictor(schema.label_names), schema_(std::move(schema)), probs_(std::move(probs)) {
    if (probs_.size() != SpaceSize(schema_)) {
      throw Error(ErrorCode::kInvalidArgument, "table size does not match the feature space");
    }
  }

  static std::unique_ptr<TableModel> FromFunction(
      const FeatureSchema& schema, const std::function<std::vector<double>(const Sample&)>& fn) {
    const std::size_t n = SpaceSize(schema);
    if (n > kMaxCells) throw Error(ErrorCode::kInvalidArgument, "feature space too large for a table");
    std::vector<std::vector<double>> probs(n);
    for (std::size_t i = 0; i < n; ++i) probs[i] = fn(PointAt(schema, i));
    return std::make_unique<TableModel>(schema, std::move(probs));
  }

  const FeatureSchema& schema() const { return schema_; }

  nlohmann::ordered_json ToJson() const override {
    nlohmann::ordered_json j;
    j["format"] = "fairga-model";
    j["version"] = 1;
    j["kind"] = "table";
    j["schema"] = SchemaToJson(schema_);
    j["probs"] = probs_;
    return j;
  }

 protected:
  std::vector<double> DoPredict(const Sample& sample) const override {
    return probs_.at(IndexOf(schema_, sample));
  }

 private:
  FeatureSchema schema_;
  std::vector<std::vector<double>> probs_;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  ModelKind kind = ModelKind::kMlp;
  std::size_t hidden_layers = 5;   // Mlp only
  std::size_t neurons = 128;       // Mlp only
  std::size_t vocab_size = 5000;   // TextBow only
  std::size_t epochs = 20;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t rng_seed = 0;

  void Validate() const {
    if (epochs == 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be > 0");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
    if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be > 0");
    if (kind == ModelKind::kMlp && (hidden_layers == 0 || neurons == 0)) {
      throw Error(ErrorCode::kInvalidArgument, "mlp needs at least one hidden layer and neuron");
    }
  }
};

struct TrainResult {
  std::unique_ptr<NeuralModel> model;
  double train_accuracy = 0.0;
  double final_loss = 0.0;
};

// Minibatch SGD on softmax cross-entropy. Deterministic for a fixed rng_seed.
inline TrainResult Train(const Dataset& ds, const TrainConfig& config) {
  config.Validate();
  if (!ds.HasLabels()) throw Error(ErrorCode::kInvalidArgument, "training data has no labels");
  const auto& schema = ds.schema;
  if (schema.IsText() != (config.kind == ModelKind::kTextBow)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("model kind '") + ModelKindName(config.kind) + "' does not fit this dataset");
  }

  Vocabulary vocab;
  if (schema.IsText()) vocab = Vocabulary::Build(ds.samples, config.vocab_size);
  const auto in_dim = static_cast<Eigen::Index>(schema.IsText() ? vocab.size() : EncodedDimension(schema));
  const auto n_labels = static_cast<Eigen::Index>(schema.label_names.size());
  const auto n = static_cast<Eigen::Index>(ds.size());

  Eigen::MatrixXd x(in_dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = ds.samples[static_cast<std::size_t>(i)];
    if (schema.IsText()) {
      vocab.EncodeInto(s, x.col(i));
    } else {
      EncodeInto(s, schema, std::span<double>(x.col(i).data(), static_cast<std::size_t>(in_dim)));
    }
  }

  Rng rng(config.rng_seed);
  std::vector<Eigen::Index> widths{in_dim};
  if (config.kind == ModelKind::kMlp) {
    for (std::size_t l = 0; l < config.hidden_layers; ++l) widths.push_back(static_cast<Eigen::Index>(config.neurons));
  }
  widths.push_back(n_labels);

  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(widths[l] + widths[l + 1]));
    std::uniform_real_distribution<double> init(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(widths[l + 1], widths[l]), Eigen::VectorXd::Zero(widths[l + 1])};
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = init(rng);
    }
    layers.push_back(std::move(layer));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const std::size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> acts(depth + 1);
  std::vector<Eigen::MatrixXd> pre(depth);
  double epoch_loss = 0.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto b = static_cast<Eigen::Index>(end - start);
      acts[0].resize(in_dim, b);
      Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_labels, b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const Eigen::Index row = order[start + static_cast<std::size_t>(k)];
        acts[0].col(k) = x.col(row);
        y(static_cast<Eigen::Index>(ds.labels[static_cast<std::size_t>(row)]), k) = 1.0;
      }
      for (std::size_t l = 0; l < depth; ++l) {
        pre[l] = (layers[l].weights * acts[l]).colwise() + layers[l].bias;
        acts[l + 1] = (l + 1 < depth) ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
      }
      Eigen::MatrixXd probs = acts[depth];
      for (Eigen::Index k = 0; k < b; ++k) {
        const double m = probs.col(k).maxCoeff();
        probs.col(k) = (probs.col(k).array() - m).exp();
        probs.col(k) /= probs.col(k).sum();
        for (Eigen::Index c = 0; c < n_labels; ++c) {
          if (y(c, k) > 0.0) epoch_loss -= std::log(std::max(probs(c, k), 1e-300));
        }
      }
      Eigen::MatrixXd delta = (probs - y) / static_cast<double>(b);
      for (std::size_t l = depth; l-- > 0;) {
        Eigen::MatrixXd grad_w = delta * acts[l].transpose();
        Eigen::VectorXd grad_b = delta.rowwise().sum();
        if (l > 0) {
          delta = (layers[l].weights.transpose() * delta).cwiseProduct(
              (pre[l - 1].array() > 0.0).matrix().cast<double>());
        }
        layers[l].weights -= config.learning_rate * grad_w;
        layers[l].bias -= config.learning_rate * grad_b;
      }
    }
    epoch_loss /= static_cast<double>(std::max<Eigen::Index>(n, 1));
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::kDiverged, "loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
  }

  TrainResult result;
  result.model = std::make_unique<NeuralModel>(config.kind, schema, std::move(vocab), std::move(layers));
  result.final_loss = epoch_loss;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = result.model->PredictEncoded(x.col(i));
    const auto label = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (label == ds.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  result.train_accuracy = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  return result;
}

inline double Accuracy(const Predictor& f, const Dataset& ds) {
  if (!ds.HasLabels()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (f.PredictLabel(ds.samples[i]) == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

struct LoadedModel {
  FeatureSchema schema;
  std::unique_ptr<Predictor> predictor;
};

inline void SaveModel(const Predictor& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << model.ToJson().dump() << '\n';
}

inline LoadedModel ModelFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format") != "fairga-model") throw Error(ErrorCode::kInvalidArgument, "not a fairga model file");
    LoadedModel loaded;
    loaded.schema = SchemaFromJson(j.at("schema"));
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "table") {
      loaded.predictor = std::make_unique<TableModel>(
          loaded.schema, j.at("probs").get<std::vector<std::vector<double>>>());
      return loaded;
    }
    ModelKind mk;
    if (kind == "logistic") {
      mk = ModelKind::kLogistic;
    } else if (kind == "mlp") {
      mk = ModelKind::kMlp;
    } else if (kind == "bow") {
      mk = ModelKind::kTextBow;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown model kind '" + kind + "'");
    }
    Vocabulary vocab;
    if (j.contains("vocab")) vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
    std::vector<DenseLayer> layers;
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("w").get<std::vector<double>>();
      const auto b = lj.at("b").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
        throw Error(ErrorCode::kInvalidArgument, "layer shape mismatch in model file");
      }
      DenseLayer layer;
      layer.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), rows, cols);
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
      layers.push_back(std::move(layer));
    }
    if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "model file has no layers");
    loaded.predictor = std::make_unique<NeuralModel>(mk, loaded.schema, std::move(vocab), std::move(layers));
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad model file: ") + e.what());
  }
}

inline LoadedModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
  return ModelFromJson(j);
}

}  // namespace fairga

#endif  // FAIRGA_MODEL_HPP_
