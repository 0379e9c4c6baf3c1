// Copyright 2026 The SBF Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Word mover's distance: the minimum cost of moving one text's normalized
// bag-of-words mass onto another's, with Euclidean distance between word
// embeddings as the ground cost.

#ifndef SBF_WMD_HPP
#define SBF_WMD_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbf/error.hpp"
#include "sbf/metrics.hpp"

namespace sbf {

class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  void add(std::string word, std::vector<double> vec) {
    if (vec.empty()) throw InvalidArgument("embedding: empty vector for '" + word + "'");
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_) {
      throw InvalidArgument("embedding: '" + word + "' has dimension " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    table_[std::move(word)] = std::move(vec);
  }

  // Plain text, one "word v1 ... vd" entry per line.
  static EmbeddingTable read(std::istream& in) {
    EmbeddingTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::string word;
      if (!(ss >> word)) continue;
      std::vector<double> v;
      double x;
      while (ss >> x) v.push_back(x);
      if (!ss.eof()) throw IoError("embedding line " + std::to_string(lineno) + ": bad number");
      try {
        t.add(word, std::move(v));
      } catch (const InvalidArgument& e) {
        throw IoError("embedding line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (t.table_.empty()) throw IoError("embedding file has no vectors");
    return t;
  }

  static EmbeddingTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read embeddings '" + path + "'");
    return read(in);
  }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  const std::vector<double>* find(const std::string& w) const {
    const auto it = table_.find(w);
    return it == table_.end() ? nullptr : &it->second;
  }

  double distance(const std::string& a, const std::string& b) const {
    const auto* x = find(a);
    const auto* y = find(b);
    if (!x || !y) throw InvalidArgument("embedding: out-of-vocabulary word");
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += ((*x)[i] - (*y)[i]) * ((*x)[i] - (*y)[i]);
    return std::sqrt(s);
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

namespace detail {

// Min-cost flow on a dense bipartite transport problem with integer
// supplies and demands (equal totals), by successive shortest paths with
// Bellman-Ford on the residual graph. Returns the optimal total cost.
inline double min_cost_transport(const std::vector<std::int64_t>& supply,
                                 const std::vector<std::int64_t>& demand,
                                 const std::vector<std::vector<double>>& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  const std::size_t source = m + n, sink = m + n + 1, nodes = m + n + 2;
  struct Edge {
    std::size_t to;
    std::int64_t cap;
    double cost;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g(nodes);
  auto add_edge = [&](std::size_t u, std::size_t v, std::int64_t cap, double c) {
    g[u].push_back({v, cap, c, g[v].size()});
    g[v].push_back({u, 0, -c, g[u].size() - 1});
  };
  const std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  for (std::size_t i = 0; i < m; ++i) add_edge(source, i, supply[i], 0.0);
  for (std::size_t j = 0; j < n; ++j) add_edge(m + j, sink, demand[j], 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) add_edge(i, m + j, total, cost[i][j]);
  }

  double result = 0.0;
  std::int64_t flow = 0;
  const double inf = std::numeric_limits<double>::infinity();
  while (flow < total) {
    std::vector<double> dist(nodes, inf);
    std::vector<std::size_t> prev_node(nodes), prev_edge(nodes);
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (dist[u] == inf) continue;
        for (std::size_t e = 0; e < g[u].size(); ++e) {
          const Edge& ed = g[u][e];
          if (ed.cap > 0 && dist[u] + ed.cost < dist[ed.to] - 1e-12) {
            dist[ed.to] = dist[u] + ed.cost;
            prev_node[ed.to] = u;
            prev_edge[ed.to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == inf) throw Error("wmd: transport problem infeasible");
    std::int64_t push = total - flow;
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      push = std::min(push, g[prev_node[v]][prev_edge[v]].cap);
    }
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      Edge& ed = g[prev_node[v]][prev_edge[v]];
      ed.cap -= push;
      g[v][ed.rev].cap += push;
      result += static_cast<double>(push) * ed.cost;
    }
    flow += push;
  }
  return result;
}

struct Histogram {
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  std::size_t oov = 0;
};

inline Histogram histogram(const Tokens& t, const EmbeddingTable& emb) {
  std::map<std::string, std::int64_t> c;
  Histogram h;
  for (const auto& w : t) {
    if (emb.find(w)) ++c[w];
    else ++h.oov;
  }
  for (const auto& [w, n] : c) {
    h.words.push_back(w);
    h.counts.push_back(n);
    h.total += n;
  }
  return h;
}

}  // namespace detail

struct WmdResult {
  double distance = 0.0;
  std::size_t hypothesis_oov = 0;  // dropped hypothesis tokens
  std::size_t reference_oov = 0;   // dropped tokens of the best reference
};

// Exact WMD between two token lists. Out-of-vocabulary tokens are dropped
// and counted; if either side has no in-vocabulary token, throws.
inline WmdResult wmd_pair(const Tokens& hyp, const Tokens& ref, const EmbeddingTable& emb) {
  const auto h = detail::histogram(hyp, emb);
  const auto r = detail::histogram(ref, emb);
  if (h.total == 0) throw InvalidArgument("wmd: hypothesis has no in-vocabulary tokens");
  if (r.total == 0) throw InvalidArgument("wmd: reference has no in-vocabulary tokens");
  // Mass c_i/|h| and d_j/|r|, scaled by |h||r| to integers.
  std::vector<std::int64_t> supply, demand;
  for (auto c : h.counts) supply.push_back(c * r.total);
  for (auto d : r.counts) demand.push_back(d * h.total);
  std::vector<std::vector<double>> cost(h.words.size(), std::vector<double>(r.words.size()));
  for (std::size_t i = 0; i < h.words.size(); ++i) {
    for (std::size_t j = 0; j < r.words.size(); ++j) cost[i][j] = emb.distance(h.words[i], r.words[j]);
  }
  const double total = detail::min_cost_transport(supply, demand, cost);
  return {total / static_cast<double>(h.total * r.total), h.oov, r.oov};
}

// Minimum over references; references with no in-vocabulary token are
// skipped, and if none remain (or the hypothesis is all OOV) throws.
inline WmdResult wmd(const Tokens& hyp, const std::vector<Tokens>& refs, const EmbeddingTable& emb) {
  detail::require_refs(hyp, refs, "wmd");
  std::optional<WmdResult> best;
  for (const auto& r : refs) {
    if (detail::histogram(r, emb).total == 0) continue;
    const WmdResult x = wmd_pair(hyp, r, emb);
    if (!best || x.distance < best->distance) best = x;
  }
  if (!best) {
    if (detail::histogram(hyp, emb).total == 0) {
      throw InvalidArgument("wmd: hypothesis has no in-vocabulary tokens");
    }
    throw InvalidArgument("wmd: no reference has in-vocabulary tokens");
  }
  return *best;
}

}  // namespace sbf

#endif  // SBF_WMD_HPP
