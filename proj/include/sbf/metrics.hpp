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

// Classification and word-overlap metrics.

#ifndef SBF_METRICS_HPP
#define SBF_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "sbf/error.hpp"

namespace sbf {

using Tokens = std::vector<std::string>;

struct PRF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double gold_positive_rate = 0.0;
  bool precision_undefined = false;  // no positive predictions
  bool recall_undefined = false;     // no positive gold labels
};

// Scores of the positive class. A zero denominator yields 0 and sets the
// matching flag.
inline PRF1 prf1(const std::vector<int>& predictions, const std::vector<int>& gold) {
  if (predictions.size() != gold.size()) throw InvalidArgument("prf1: length mismatch");
  if (gold.empty()) throw InvalidArgument("prf1: empty input");
  double tp = 0, fp = 0, fn = 0, pos = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] != 0, g = gold[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
    pos += g;
  }
  PRF1 r;
  r.gold_positive_rate = pos / static_cast<double>(gold.size());
  if (tp + fp > 0) r.precision = tp / (tp + fp);
  else r.precision_undefined = true;
  if (tp + fn > 0) r.recall = tp / (tp + fn);
  else r.recall_undefined = true;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// Floor applied to a zero n-gram precision inside the geometric mean.
inline constexpr double kBleuFloor = 1e-9;

namespace detail {

inline std::map<Tokens, std::size_t> ngram_counts(const Tokens& t, std::size_t n) {
  std::map<Tokens, std::size_t> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
  return out;
}

inline void require_refs(const Tokens& hyp, const std::vector<Tokens>& refs, const char* who) {
  if (hyp.empty()) throw InvalidArgument(std::string(who) + ": empty hypothesis");
  if (refs.empty()) throw InvalidArgument(std::string(who) + ": no references");
}

}  // namespace detail

// BLEU with uniform weights over unigrams and bigrams. Counts are clipped by
// the maximum count in any single reference; the brevity penalty uses the
// reference length closest to the hypothesis length (shorter wins ties).
// A zero precision is floored at kBleuFloor. An order with no hypothesis
// n-grams (a one-token hypothesis has no bigrams) is left out of the mean.
inline double bleu2(const Tokens& hyp, const std::vector<Tokens>& refs) {
  detail::require_refs(hyp, refs, "bleu2");
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 2; ++n) {
    if (hyp.size() < n) continue;
    const auto h = detail::ngram_counts(hyp, n);
    std::map<Tokens, std::size_t> max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : detail::ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    std::size_t clipped = 0;
    for (const auto& [g, c] : h) {
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    const double p = static_cast<double>(clipped) / static_cast<double>(hyp.size() - n + 1);
    log_sum += std::log(std::max(p, kBleuFloor));
    ++orders;
  }
  const double c = static_cast<double>(hyp.size());
  double r = static_cast<double>(refs.front().size());
  for (const auto& ref : refs) {
    const double len = static_cast<double>(ref.size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / orders);
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ROUGE-L F1 (beta = 1), best over references.
inline double rougeL_f1(const Tokens& hyp, const std::vector<Tokens>& refs) {
  detail::require_refs(hyp, refs, "rougeL_f1");
  double best = 0.0;
  for (const auto& r : refs) {
    if (r.empty()) continue;
    const double l = static_cast<double>(lcs_length(hyp, r));
    if (l == 0) continue;
    const double p = l / static_cast<double>(hyp.size());
    const double rc = l / static_cast<double>(r.size());
    best = std::max(best, 2 * p * rc / (p + rc));
  }
  return best;
}

}  // namespace sbf

#endif  // SBF_METRICS_HPP
