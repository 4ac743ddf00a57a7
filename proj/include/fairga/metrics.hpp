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

// Run metrics, two-sample statistics and a 2-D diversity projection.

#ifndef FAIRGA_METRICS_HPP_
#define FAIRGA_METRICS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"
#include "json.hpp"

namespace fairga {

inline std::optional<double> Dss(double elapsed_seconds, std::size_t dsn) {
  if (dsn == 0) return std::nullopt;
  return elapsed_seconds / static_cast<double>(dsn);
}

inline double Sur(std::size_t dsn, std::size_t tsn) {
  return tsn == 0 ? 0.0 : static_cast<double>(dsn) / static_cast<double>(tsn);
}

// "-" for an absent DSS.
inline std::string FormatDss(std::optional<double> dss) {
  if (!dss) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *dss);
  return buf;
}

// ---------------------------------------------------------------------------
// Mann-Whitney U and Vargha-Delaney A12
// ---------------------------------------------------------------------------

// Totals up to this size use the exact permutation distribution.
inline constexpr std::size_t kExactMannWhitneyLimit = 20;

struct MannWhitneyResult {
  double u = 0.0;  // U of the first sample
  double p = 1.0;  // two-sided
  bool exact = false;
};

// Midranks (1-based) of the pooled values, in pooled order.
inline std::vector<double> MidRanks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

// Distribution of the doubled rank sum of n1 items drawn from `doubled`
// (all C(n, n1) subsets equally likely); returns counts indexed by sum.
inline std::vector<double> RankSumCounts(const std::vector<long>& doubled, std::size_t n1) {
  long total = 0;
  for (auto r : doubled) total += r;
  std::vector<std::vector<double>> dp(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  dp[0][0] = 1.0;
  for (auto r : doubled) {
    for (std::size_t k = n1; k >= 1; --k) {
      for (long s = total; s >= r; --s) {
        dp[k][static_cast<std::size_t>(s)] += dp[k - 1][static_cast<std::size_t>(s - r)];
      }
    }
  }
  return dp[n1];
}

}  // namespace detail

inline MannWhitneyResult MannWhitneyU(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kInvalidArgument, "Mann-Whitney needs two non-empty samples");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = MidRanks(pooled);
  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  MannWhitneyResult result;
  const double base = static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  result.u = r1 - base;
  const double mean_u = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;

  if (n <= kExactMannWhitneyLimit) {
    result.exact = true;
    std::vector<long> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = std::lround(2.0 * ranks[i]);
    const auto counts = detail::RankSumCounts(doubled, n1);
    // Compare in doubled units so midrank sums stay exact integers.
    const long observed = std::lround(2.0 * r1);
    const double center = 2.0 * (mean_u + base);
    const double dev = std::fabs(static_cast<double>(observed) - center);
    double extreme = 0.0;
    double all = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] == 0.0) continue;
      all += counts[s];
      if (std::fabs(static_cast<double>(s) - center) >= dev - 1e-9) extreme += counts[s];
    }
    result.p = std::min(1.0, extreme / all);
    return result;
  }

  std::map<double, std::size_t> ties;
  for (double v : pooled) ++ties[v];
  double tie_sum = 0.0;
  for (const auto& [v, t] : ties) {
    const double td = static_cast<double>(t);
    tie_sum += td * td * td - td;
  }
  const double nd = static_cast<double>(n);
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 * ((nd + 1.0) - tie_sum / (nd * (nd - 1.0)));
  if (var <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double z = std::max(0.0, std::fabs(result.u - mean_u) - 0.5) / std::sqrt(var);
  result.p = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return result;
}

// P(A > B) + 0.5 P(A = B) over all pairs.
inline double VarghaDelaneyA12(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kInvalidArgument, "A12 needs two non-empty samples");
  // Rank-based form: (R1/n1 - (n1+1)/2) / n2, equal to the pair count.
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = MidRanks(pooled);
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  return (r1 / n1 - (n1 + 1.0) / 2.0) / n2;
}

struct RunComparison {
  std::vector<double> dss_a;
  std::vector<double> dss_b;
  MannWhitneyResult test;
  double a12 = 0.5;
};

inline RunComparison CompareRuns(std::vector<double> dss_a, std::vector<double> dss_b) {
  RunComparison c;
  c.test = MannWhitneyU(dss_a, dss_b);
  c.a12 = VarghaDelaneyA12(dss_a, dss_b);
  c.dss_a = std::move(dss_a);
  c.dss_b = std::move(dss_b);
  return c;
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct Projection {
  std::vector<std::array<double, 2>> points;
  std::array<double, 2> eigenvalues{0.0, 0.0};
  // Covariance rank below 2: the missing coordinates are zero.
  bool degenerate = false;
};

inline constexpr double kPowerTolerance = 1e-9;

namespace detail {

// Dominant eigenpair of a symmetric PSD matrix.
inline std::pair<double, Eigen::VectorXd> PowerIteration(const Eigen::MatrixXd& m) {
  const auto d = m.rows();
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i % 7) + 0.01 * static_cast<double>(i);
  v.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::VectorXd w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return {0.0, v};
    w /= norm;
    const double next = w.dot(m * w);
    const double change = (w - v).norm();
    v = std::move(w);
    if (std::fabs(next - lambda) <= kPowerTolerance * std::max(1.0, std::fabs(next)) && change <= 1e-7) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Deterministic sign: largest-magnitude component positive.
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0) v = -v;
  return {lambda, v};
}

}  // namespace detail

// Projects the rows of `data` onto the top two principal axes.
inline Projection PcaProject(const Eigen::MatrixXd& data) {
  if (data.rows() < 3) throw Error(ErrorCode::kInvalidArgument, "PCA needs at least 3 points");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
  const double scale = std::max(cov.trace(), 1e-300);
  Projection out;
  out.points.assign(static_cast<std::size_t>(data.rows()), {0.0, 0.0});
  for (int axis = 0; axis < 2; ++axis) {
    if (cov.rows() <= axis || cov.trace() <= 1e-12 * scale) {
      out.degenerate = true;
      break;
    }
    auto [lambda, v] = detail::PowerIteration(cov);
    if (lambda <= 1e-12 * scale) {
      out.degenerate = true;
      break;
    }
    out.eigenvalues[static_cast<std::size_t>(axis)] = lambda;
    const Eigen::VectorXd coord = centered * v;
    for (Eigen::Index r = 0; r < coord.size(); ++r) out.points[static_cast<std::size_t>(r)][axis] = coord[r];
    cov -= lambda * v * v.transpose();
  }
  return out;
}

// Samples encoded for projection: one-hot/min-max for tabular, binary word
// presence over the samples' own vocabulary for text.
inline Eigen::MatrixXd EncodeForProjection(const std::vector<Sample>& samples, const FeatureSchema& schema) {
  if (!schema.IsText()) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(EncodedDimension(schema)));
    for (std::size_t r = 0; r < samples.size(); ++r) {
      const auto row = Encode(samples[r], schema);
      for (std::size_t c = 0; c < row.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return m;
  }
  std::map<std::string, Eigen::Index> vocab;
  for (const auto& s : samples) {
    for (const auto& v : s.values) vocab.emplace(std::get<TokenWord>(v).text, 0);
  }
  Eigen::Index next = 0;
  for (auto& [w, idx] : vocab) idx = next++;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(samples.size()), next);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (const auto& v : samples[r].values) m(static_cast<Eigen::Index>(r), vocab.at(std::get<TokenWord>(v).text)) = 1.0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json MetricsToJson(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["tsn"] = m.tsn;
  j["dsn"] = m.dsn;
  j["elapsed"] = m.elapsed;
  const auto dss = m.dss();
  j["dss"] = dss ? nlohmann::ordered_json(*dss) : nlohmann::ordered_json(nullptr);
  j["sur"] = m.sur();
  return j;
}

// Reads tsn/dsn/elapsed; the ratios are recomputed from them.
inline RunMetrics ReadMetrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    RunMetrics m;
    m.tsn = j.at("tsn").get<std::size_t>();
    m.dsn = j.at("dsn").get<std::size_t>();
    m.elapsed = j.at("elapsed").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

inline void WriteJson(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

inline nlohmann::ordered_json ComparisonToJson(const RunComparison& c) {
  nlohmann::ordered_json j;
  j["u"] = c.test.u;
  j["p"] = c.test.p;
  j["a12"] = c.a12;
  j["exact"] = c.test.exact;
  j["dss_a"] = c.dss_a;
  j["dss_b"] = c.dss_b;
  return j;
}

struct LabeledPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

inline void WriteDiversityCsv(const std::vector<LabeledPoint>& points, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "x,y,label\n";
  char buf[64];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,", p.x, p.y);
    out << buf << detail::QuoteCsv(p.label) << "\n";
  }
}

}  // namespace fairga

#endif  // FAIRGA_METRICS_HPP_
