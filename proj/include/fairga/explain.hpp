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

// Perturbation-based local surrogate explanations.
//
// For a sample x, positions are independently perturbed, and a weighted ridge
// regression of the model's target-label probability on binary "kept
// original" indicators yields one importance score per position.

#ifndef FAIRGA_EXPLAIN_HPP_
#define FAIRGA_EXPLAIN_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "fairga/model.hpp"
#include "fairga/rng.hpp"

namespace fairga {

// Replacement for a dropped word when perturbing text.
inline constexpr std::string_view kMaskToken = "<mask>";

struct ExplainerConfig {
  std::size_t n_perturb = 1000;
  // Defaults to 0.75 * sqrt(d), d = encoded dimension (token count for text).
  std::optional<double> kernel_width;
  double ridge_lambda = 1.0;
  std::uint64_t rng_seed = 0;

  void Validate() const {
    if (n_perturb < 2) throw Error(ErrorCode::kInvalidArgument, "n_perturb must be >= 2");
    if (kernel_width && !(*kernel_width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel_width must be > 0");
    if (ridge_lambda < 0.0) throw Error(ErrorCode::kInvalidArgument, "ridge_lambda must be >= 0");
  }
};

struct Perturbation {
  Sample sample;
  std::vector<std::uint8_t> kept;  // 1 = position holds its original value
  double weight = 1.0;
};

inline double KernelWidthFor(const Sample& x, const FeatureSchema& schema, const ExplainerConfig& config) {
  if (config.kernel_width) return *config.kernel_width;
  const double d = schema.IsText() ? static_cast<double>(x.size()) : static_cast<double>(EncodedDimension(schema));
  return 0.75 * std::sqrt(std::max(d, 1.0));
}

// exp(-dist^2 / width^2), dist = fraction of changed positions.
inline double KernelWeight(std::size_t changed, std::size_t positions, double width) {
  const double dist = positions == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(positions);
  return std::exp(-(dist * dist) / (width * width));
}

// Returns exactly config.n_perturb neighbours; the first is x itself.
inline std::vector<Perturbation> PerturbNeighborhood(const Sample& x, const FeatureSchema& schema,
                                                     const ExplainerConfig& config, Rng& rng) {
  config.Validate();
  if (schema.IsText() && x.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty token list");
  const std::size_t m = x.size();
  const double width = KernelWidthFor(x, schema, config);
  std::vector<Perturbation> out;
  out.reserve(config.n_perturb);
  out.push_back({x, std::vector<std::uint8_t>(m, 1), 1.0});
  for (std::size_t k = 1; k < config.n_perturb; ++k) {
    Perturbation p{x, std::vector<std::uint8_t>(m, 1), 1.0};
    p.sample.origin = Origin::kGenerated;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!Bernoulli(rng, 0.5)) continue;
      if (schema.IsText()) {
        p.sample.values[i] = TokenWord{std::string(kMaskToken)};
      } else {
        p.sample.values[i] = RandomValue(schema.features[i], rng);
      }
      if (p.sample.values[i] != x.values[i]) {
        p.kept[i] = 0;
        ++changed;
      }
    }
    p.weight = KernelWeight(changed, m, width);
    out.push_back(std::move(p));
  }
  return out;
}

// Weighted ridge regression with an unpenalized intercept. Returns one
// coefficient per indicator column.
inline std::vector<double> WeightedRidge(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& w, double lambda) {
  const double total = w.sum();
  const Eigen::RowVectorXd z_mean = (w.transpose() * z) / total;
  const double y_mean = w.dot(y) / total;
  const Eigen::MatrixXd zc = z.rowwise() - z_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = zc.transpose() * w.asDiagonal() * zc;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = zc.transpose() * w.asDiagonal() * yc;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularFit, "design matrix is rank deficient; increase n_perturb");
  }
  const Eigen::VectorXd beta = llt.solve(rhs);
  if (!beta.allFinite()) throw Error(ErrorCode::kSingularFit, "non-finite surrogate coefficients");
  return {beta.data(), beta.data() + beta.size()};
}

// Surrogate coefficients for f's `target_label` probability around x.
inline std::vector<double> SurrogateCoefficients(const Sample& x, const FeatureSchema& schema, const Predictor& f,
                                                 std::size_t target_label, const ExplainerConfig& config,
                                                 std::uint64_t stream) {
  if (target_label >= f.labels().size()) throw Error(ErrorCode::kInvalidArgument, "target label out of range");
  Rng rng = MakeStream(config.rng_seed, stream);
  const auto neighbours = PerturbNeighborhood(x, schema, config, rng);
  const auto n = static_cast<Eigen::Index>(neighbours.size());
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd z(n, m);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& p = neighbours[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m; ++c) z(r, c) = p.kept[static_cast<std::size_t>(c)];
    y[r] = f.PredictProba(p.sample)[target_label];
    w[r] = p.weight;
  }
  return WeightedRidge(z, y, w, config.ridge_lambda);
}

// Produces e = g(x, f, label).
class Explainer {
 public:
  virtual ~Explainer() = default;
  // `stream` selects the private random stream of this call (e.g. the row
  // index), so explanations are reproducible in any evaluation order.
  virtual Explanation Explain(const Sample& x, const Predictor& f, std::size_t target_label,
                              std::uint64_t stream) const = 0;
};

class SurrogateExplainer : public Explainer {
 public:
  SurrogateExplainer(FeatureSchema schema, ExplainerConfig config)
      : schema_(std::move(schema)), config_(config) {
    config_.Validate();
  }

  const ExplainerConfig& config() const { return config_; }

  Explanation Explain(const Sample& x, const Predictor& f, std::size_t target_label,
                      std::uint64_t stream) const override {
    const auto coef = SurrogateCoefficients(x, schema_, f, target_label, config_, stream);
    return Explanation::FromScores(coef);
  }

 private:
  FeatureSchema schema_;
  ExplainerConfig config_;
};

// 1 + number of entries ranked ahead of `position`.
inline std::size_t RankNum(std::size_t position, const Explanation& e) {
  const auto& entries = e.entries();
  for (std::size_t r = 0; r < entries.size(); ++r) {
    if (entries[r].index == position) return r + 1;
  }
  throw Error(ErrorCode::kNotInExplanation, "position " + std::to_string(position) + " is not in the explanation");
}

}  // namespace fairga

#endif  // FAIRGA_EXPLAIN_HPP_
