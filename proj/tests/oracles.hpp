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

// Brute-force reference implementations of the generation metrics, written
// independently of the library code: BLEU from explicit n-gram lists,
// ROUGE-L by subset enumeration, WMD by enumerating the vertices of the
// transport polytope.

#ifndef SBF_TESTS_ORACLES_HPP
#define SBF_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sbf/metrics.hpp"
#include "sbf/wmd.hpp"

namespace sbf::oracles {

inline Tokens toks(const std::string& s) {
  std::istringstream in(s);
  Tokens out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

// --- brute-force oracles ---------------------------------------------------

inline std::size_t occurrences(const Tokens& t, const Tokens& gram) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + gram.size() <= t.size(); ++i) {
    n += std::equal(gram.begin(), gram.end(), t.begin() + i) ? 1 : 0;
  }
  return n;
}

inline double bleu2_oracle(const Tokens& hyp, const std::vector<Tokens>& refs) {
  std::vector<double> logs;
  for (std::size_t n = 1; n <= 2 && n <= hyp.size(); ++n) {
    std::vector<Tokens> seen;
    double clipped = 0;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
      const Tokens g(hyp.begin() + i, hyp.begin() + i + n);
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      std::size_t cap = 0;
      for (const auto& r : refs) cap = std::max(cap, occurrences(r, g));
      clipped += static_cast<double>(std::min(occurrences(hyp, g), cap));
    }
    const double p = clipped / static_cast<double>(hyp.size() - n + 1);
    logs.push_back(std::log(p > 0 ? p : 1e-9));
  }
  std::vector<std::pair<double, double>> by_distance;
  const double c = static_cast<double>(hyp.size());
  for (const auto& r : refs) {
    by_distance.push_back({std::abs(static_cast<double>(r.size()) - c), static_cast<double>(r.size())});
  }
  const double r = std::min_element(by_distance.begin(), by_distance.end())->second;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size()));
}

inline bool is_subsequence(const Tokens& s, const Tokens& t) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < t.size() && j < s.size(); ++i) j += s[j] == t[i] ? 1 : 0;
  return j == s.size();
}

inline double rouge_oracle(const Tokens& hyp, const std::vector<Tokens>& refs) {
  double best = 0;
  for (const auto& r : refs) {
    std::size_t lcs = 0;
    for (unsigned mask = 0; mask < (1u << hyp.size()); ++mask) {
      Tokens sub;
      for (std::size_t i = 0; i < hyp.size(); ++i) {
        if (mask >> i & 1u) sub.push_back(hyp[i]);
      }
      if (sub.size() > lcs && is_subsequence(sub, r)) lcs = sub.size();
    }
    if (lcs == 0 || r.empty()) continue;
    const double p = static_cast<double>(lcs) / static_cast<double>(hyp.size());
    const double rc = static_cast<double>(lcs) / static_cast<double>(r.size());
    best = std::max(best, 2 * p * rc / (p + rc));
  }
  return best;
}

// Transport LP minimum by enumerating basic solutions: every vertex of the
// transportation polytope is supported on a spanning tree of the bipartite
// graph, which fixes the flow by peeling leaves.
inline double transport_oracle(std::vector<double> a, std::vector<double> b,
                        const std::vector<std::vector<double>>& cost) {
  const std::size_t m = a.size(), n = b.size(), cells = m * n, need = m + n - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(cells, 0);
  std::fill(pick.end() - static_cast<std::ptrdiff_t>(need), pick.end(), 1);
  do {
    std::vector<std::size_t> edges;
    for (std::size_t e = 0; e < cells; ++e) {
      if (pick[e]) edges.push_back(e);
    }
    std::vector<double> sa = a, sb = b, flow(cells, 0.0);
    std::vector<bool> done(edges.size(), false);
    bool ok = true;
    for (std::size_t step = 0; step < edges.size() && ok; ++step) {
      // Find a row or column node of degree one among remaining edges.
      std::vector<int> deg(m + n, 0);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        if (!done[k]) {
          ++deg[edges[k] / n];
          ++deg[m + edges[k] % n];
        }
      }
      bool found = false;
      for (std::size_t k = 0; k < edges.size() && !found; ++k) {
        if (done[k]) continue;
        const std::size_t i = edges[k] / n, j = edges[k] % n;
        if (deg[i] == 1 || deg[m + j] == 1) {
          const double f = deg[i] == 1 ? sa[i] : sb[j];
          flow[edges[k]] = f;
          sa[i] -= f;
          sb[j] -= f;
          done[k] = true;
          found = true;
        }
      }
      ok = found;  // no leaf means a cycle: not a tree
    }
    if (!ok) continue;
    bool feasible = true;
    for (double x : flow) feasible = feasible && x >= -1e-12;
    for (double x : sa) feasible = feasible && std::abs(x) < 1e-9;
    for (double x : sb) feasible = feasible && std::abs(x) < 1e-9;
    if (!feasible) continue;
    double c = 0;
    for (std::size_t e = 0; e < cells; ++e) c += flow[e] * cost[e / n][e % n];
    best = std::min(best, c);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

inline double wmd_oracle(const Tokens& hyp, const std::vector<Tokens>& refs, const EmbeddingTable& emb) {
  auto hist = [](const Tokens& t) {
    std::vector<std::string> w(t.begin(), t.end());
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    std::vector<double> mass;
    for (const auto& x : w) {
      mass.push_back(static_cast<double>(std::count(t.begin(), t.end(), x)) /
                     static_cast<double>(t.size()));
    }
    return std::pair(w, mass);
  };
  double best = std::numeric_limits<double>::infinity();
  const auto [hw, hm] = hist(hyp);
  for (const auto& r : refs) {
    const auto [rw, rm] = hist(r);
    std::vector<std::vector<double>> cost(hw.size(), std::vector<double>(rw.size()));
    for (std::size_t i = 0; i < hw.size(); ++i) {
      for (std::size_t j = 0; j < rw.size(); ++j) {
        const auto& x = *emb.find(hw[i]);
        const auto& y = *emb.find(rw[j]);
        cost[i][j] = std::hypot(x[0] - y[0], x[1] - y[1]);
      }
    }
    best = std::min(best, transport_oracle(hm, rm, cost));
  }
  return best;
}

inline Tokens random_tokens(std::mt19937_64& rng, const Tokens& lex, std::size_t min_len,
                     std::size_t max_len) {
  Tokens t(min_len + rng() % (max_len - min_len + 1));
  for (auto& x : t) x = lex[rng() % lex.size()];
  return t;
}

inline EmbeddingTable toy_embeddings(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EmbeddingTable t;
  for (const char* w : {"a", "b", "c", "d"}) t.add(w, {u(rng), u(rng)});
  return t;
}

// P/R/F1 straight from the confusion counts.
inline PRF1 prf1_oracle(const std::vector<int>& p, const std::vector<int>& g) {
  double tp = 0, fp = 0, fn = 0, pos = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += p[i] && g[i];
    fp += p[i] && !g[i];
    fn += !p[i] && g[i];
    pos += g[i];
  }
  PRF1 r;
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.gold_positive_rate = p.empty() ? 0.0 : pos / static_cast<double>(p.size());
  return r;
}

}  // namespace sbf::oracles

#endif  // SBF_TESTS_ORACLES_HPP
