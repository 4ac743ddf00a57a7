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

// Sensitive-word knowledge: a relation graph linking words to protected
// attributes, a word-embedding store, graph expansion by embedding
// similarity, counterpart pairs and synonym lookup.

#ifndef FAIRGA_KNOWLEDGE_HPP_
#define FAIRGA_KNOWLEDGE_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairga/core.hpp"
#include "fairga/data.hpp"

namespace fairga {

enum class Relation { kIsA, kRelatedTo, kDistinctFrom, kHasA, kSimilarTo };

inline const char* RelationName(Relation r) {
  switch (r) {
    case Relation::kIsA: return "IsA";
    case Relation::kRelatedTo: return "RelatedTo";
    case Relation::kDistinctFrom: return "DistinctFrom";
    case Relation::kHasA: return "HasA";
    case Relation::kSimilarTo: return "SimilarTo";
  }
  return "?";
}

inline std::optional<Relation> ParseRelation(std::string_view name) {
  for (Relation r : {Relation::kIsA, Relation::kRelatedTo, Relation::kDistinctFrom, Relation::kHasA,
                     Relation::kSimilarTo}) {
    if (name == RelationName(r)) return r;
  }
  return std::nullopt;
}

inline std::string Lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Triple {
  std::string subject;
  Relation relation;
  std::string object;
};

// Directed relation graph. Words are stored lowercase.
class KnowledgeGraph {
 public:
  // Returns false (and adds nothing) for self-loops and duplicate edges.
  bool AddEdge(std::string_view subject, Relation relation, std::string_view object) {
    std::string s = Lowercase(subject);
    std::string o = Lowercase(object);
    if (s == o) return false;
    const auto from = Intern(s);
    const auto to = Intern(o);
    auto& out = adjacency_[from];
    for (const auto& e : out) {
      if (e.first == relation && e.second == to) return false;
    }
    out.emplace_back(relation, to);
    triples_.push_back({std::move(s), relation, std::move(o)});
    return true;
  }

  bool HasNode(std::string_view word) const { return ids_.count(Lowercase(word)) != 0; }

  bool HasEdge(std::string_view subject, Relation relation, std::string_view object) const {
    auto s = ids_.find(Lowercase(subject));
    auto o = ids_.find(Lowercase(object));
    if (s == ids_.end() || o == ids_.end()) return false;
    for (const auto& e : adjacency_[s->second]) {
      if (e.first == relation && e.second == o->second) return true;
    }
    return false;
  }

  std::size_t NodeCount() const { return names_.size(); }
  std::size_t EdgeCount() const { return triples_.size(); }
  const std::vector<std::string>& Nodes() const { return names_; }
  const std::vector<Triple>& Triples() const { return triples_; }

  // Protected attribute reached by the shortest directed path from `word`
  // (DistinctFrom edges are not followed). Among equally short paths the
  // lexicographically smallest attribute wins. A word that is itself a
  // protected attribute name resolves to that attribute.
  std::optional<std::string> Resolve(std::string_view word, const std::set<std::string>& protected_attrs) const {
    auto start = ids_.find(Lowercase(word));
    if (start == ids_.end()) return std::nullopt;
    std::vector<int> dist(names_.size(), -1);
    std::deque<std::size_t> queue{start->second};
    dist[start->second] = 0;
    std::optional<std::string> best;
    int best_dist = -1;
    while (!queue.empty()) {
      const auto node = queue.front();
      queue.pop_front();
      if (best && dist[node] > best_dist) break;
      if (protected_attrs.count(names_[node]) != 0) {
        if (!best || names_[node] < *best) {
          best = names_[node];
          best_dist = dist[node];
        }
        continue;
      }
      for (const auto& [rel, next] : adjacency_[node]) {
        if (rel == Relation::kDistinctFrom || dist[next] >= 0) continue;
        dist[next] = dist[node] + 1;
        queue.push_back(next);
      }
    }
    return best;
  }

  // Counterparts linked to `word` by DistinctFrom in either direction,
  // sorted.
  std::vector<std::string> Counterparts(std::string_view word) const {
    std::set<std::string> out;
    const auto w = Lowercase(word);
    for (const auto& t : triples_) {
      if (t.relation != Relation::kDistinctFrom) continue;
      if (t.subject == w) out.insert(t.object);
      if (t.object == w) out.insert(t.subject);
    }
    return {out.begin(), out.end()};
  }

 private:
  std::size_t Intern(const std::string& word) {
    auto [it, inserted] = ids_.emplace(word, names_.size());
    if (inserted) {
      names_.push_back(word);
      adjacency_.emplace_back();
    }
    return it->second;
  }

  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::pair<Relation, std::size_t>>> adjacency_;
  std::vector<Triple> triples_;
};

// Tab-separated `subject<TAB>relation<TAB>object` lines; '#' starts a comment.
inline KnowledgeGraph ParseGraph(std::istream& in) {
  KnowledgeGraph graph;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (Trim(line).empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, '\t')) parts.emplace_back(Trim(part));
    const auto relation = parts.size() == 3 ? ParseRelation(parts[1]) : std::nullopt;
    if (!relation || parts[0].empty() || parts[2].empty() || Lowercase(parts[0]) == Lowercase(parts[2])) {
      throw Error(ErrorCode::kMalformedTriple, "line " + std::to_string(line_no) + ": '" + line + "'");
    }
    graph.AddEdge(parts[0], *relation, parts[2]);
  }
  return graph;
}

inline KnowledgeGraph LoadGraph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ParseGraph(in);
}

inline std::optional<std::string> IsSensitive(std::string_view word, const std::set<std::string>& protected_attrs,
                                              const KnowledgeGraph& graph) {
  return graph.Resolve(word, protected_attrs);
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  void Add(std::string_view word, std::vector<float> vec) {
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_ || dim_ == 0) {
      throw Error(ErrorCode::kInvalidArgument, "embedding for '" + std::string(word) + "' has dimension " +
                                                   std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    const auto w = Lowercase(word);
    if (index_.count(w) != 0) return;  // first occurrence wins
    double norm = 0.0;
    for (float v : vec) norm += static_cast<double>(v) * v;
    index_.emplace(w, words_.size());
    words_.push_back(w);
    norms_.push_back(std::sqrt(norm));
    data_.insert(data_.end(), vec.begin(), vec.end());
  }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  bool Contains(std::string_view word) const { return index_.count(Lowercase(word)) != 0; }

  std::optional<std::size_t> Find(std::string_view word) const {
    auto it = index_.find(Lowercase(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Cosine similarity of two stored words; 0 when either vector is zero.
  double CosineAt(std::size_t a, std::size_t b) const {
    if (norms_[a] == 0.0 || norms_[b] == 0.0) return 0.0;
    double dot = 0.0;
    const float* va = &data_[a * dim_];
    const float* vb = &data_[b * dim_];
    for (std::size_t i = 0; i < dim_; ++i) dot += static_cast<double>(va[i]) * vb[i];
    return dot / (norms_[a] * norms_[b]);
  }

  std::optional<double> Cosine(std::string_view a, std::string_view b) const {
    auto ia = Find(a);
    auto ib = Find(b);
    if (!ia || !ib) return std::nullopt;
    return CosineAt(*ia, *ib);
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> norms_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// `word v1 v2 ... vd` per line, space separated.
inline EmbeddingStore LoadEmbeddings(const std::filesystem::path& path, std::size_t max_words = 0) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<float> vec;
    float v;
    while (ss >> v) vec.push_back(v);
    if (!ss.eof()) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + " line " + std::to_string(line_no) + ": bad number");
    }
    store.Add(word, std::move(vec));
    if (max_words != 0 && store.size() >= max_words) break;
  }
  return store;
}

struct ExpansionResult {
  KnowledgeGraph graph;
  std::size_t edges_added = 0;
  std::size_t oov_skipped = 0;
};

// Adds (candidate, SimilarTo, w) for every pre-existing graph word w whose
// cosine similarity with the candidate exceeds `threshold` (strictly).
inline ExpansionResult ExpandWithEmbeddings(const KnowledgeGraph& graph, const EmbeddingStore& store,
                                            const std::vector<std::string>& candidates, double threshold = 0.7) {
  ExpansionResult result{graph, 0, 0};
  std::vector<std::pair<std::string, std::size_t>> anchors;
  for (const auto& node : graph.Nodes()) {
    if (auto id = store.Find(node)) anchors.emplace_back(node, *id);
  }
  for (const auto& candidate : candidates) {
    const auto cid = store.Find(candidate);
    if (!cid) {
      ++result.oov_skipped;
      continue;
    }
    const auto lc = Lowercase(candidate);
    for (const auto& [node, nid] : anchors) {
      if (node == lc) continue;
      if (store.CosineAt(*cid, nid) > threshold && result.graph.AddEdge(lc, Relation::kSimilarTo, node)) {
        ++result.edges_added;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Counterpart pairs
// ---------------------------------------------------------------------------

struct SensitivePair {
  std::string original;
  std::string tilde;
  std::string neg_tilde;
  std::string protected_attr;
};

// <a~, not a~> for a sensitive word: its DistinctFrom counterpart when the
// graph stores one, otherwise the attribute's value markers prefixed to the
// word ("male master" / "female master").
inline SensitivePair GetPair(std::string_view word, const std::string& protected_attr, const KnowledgeGraph& graph,
                             const std::map<std::string, std::pair<std::string, std::string>>& markers) {
  const auto w = Lowercase(word);
  if (const auto counterparts = graph.Counterparts(w); !counterparts.empty()) {
    return {w, w, counterparts.front(), protected_attr};
  }
  if (auto it = markers.find(protected_attr); it != markers.end()) {
    return {w, it->second.first + " " + w, it->second.second + " " + w, protected_attr};
  }
  throw Error(ErrorCode::kNoPairAvailable,
              "no counterpart for '" + w + "' (" + protected_attr + "); extend the knowledge graph");
}

// Two-valued protected feature: its two domain values.
inline std::pair<Value, Value> TabularPair(const FeatureSpec& spec) {
  if (const auto* c = std::get_if<Categorical>(&spec.kind); c != nullptr && c->domain.size() == 2) {
    return {CategoryRef{0}, CategoryRef{1}};
  }
  if (const auto* n = std::get_if<Numeric>(&spec.kind); n != nullptr && n->GridSize() == 2) {
    return {NumericValue{n->min}, NumericValue{n->min + n->step}};
  }
  throw Error(ErrorCode::kNoPairAvailable, "feature '" + spec.name + "' is not two-valued");
}

// The k nearest words by cosine similarity, excluding `word` itself and
// every word the graph resolves to a protected attribute. Ties break in
// lexicographic order.
inline std::vector<std::string> Synonyms(std::string_view word, const EmbeddingStore& store, std::size_t k,
                                         const KnowledgeGraph* graph = nullptr,
                                         const std::set<std::string>& protected_attrs = {}) {
  const auto id = store.Find(word);
  if (!id) throw Error(ErrorCode::kOovWord, "'" + std::string(word) + "' is not in the embedding store");
  if (k == 0) return {};
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (i == *id) continue;
    scored.emplace_back(store.CosineAt(*id, i), i);
  }
  const auto& words = store.words();
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return words[a.second] < words[b.second];
  };
  std::sort(scored.begin(), scored.end(), better);
  std::vector<std::string> out;
  for (const auto& [score, i] : scored) {
    if (out.size() == k) break;
    if (graph != nullptr && !protected_attrs.empty() && graph->Resolve(words[i], protected_attrs)) continue;
    out.push_back(words[i]);
  }
  return out;
}

}  // namespace fairga

#endif  // FAIRGA_KNOWLEDGE_HPP_
