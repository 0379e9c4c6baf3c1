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

// Count-based n-gram language model over linearized frames.
//
// Context of position i is the previous min(i, order-1) tokens. Two
// smoothing schemes:
//
//   add-k:         p(w|h) = (c(h,w) + k) / (c(h) + k|V|)
//   interpolated:  p(w|h) = l_0/|V| + sum_{L=0}^{order-1} l_{L+1} c(h_L,w)/c(h_L)
//
// where h_L are the last L tokens of h. In the interpolated form the weight
// of an unseen context moves to the uniform term, so every distribution is
// normalized and strictly positive.

#ifndef SBF_NGRAM_HPP
#define SBF_NGRAM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sbf/error.hpp"
#include "sbf/linearizer.hpp"
#include "sbf/seqmodel.hpp"
#include "sbf/vocab.hpp"

namespace sbf {

enum class Smoothing { kAddK, kInterpolated };

struct NGramConfig {
  int order = 3;
  Smoothing smoothing = Smoothing::kAddK;
  double k = 0.01;
  // Interpolated only: uniform weight first, then orders 1..order.
  std::vector<double> weights = {};

  // Weights used when none are given: 1% uniform, the rest split in the
  // ratio 1:2:...:order across increasing orders.
  std::vector<double> effective_weights() const {
    if (!weights.empty()) return weights;
    std::vector<double> w(static_cast<std::size_t>(order) + 1);
    w[0] = 0.01;
    const double denom = order * (order + 1) / 2.0;
    for (int i = 1; i <= order; ++i) w[static_cast<std::size_t>(i)] = 0.99 * i / denom;
    return w;
  }
};

namespace detail {

struct ContextHash {
  std::size_t operator()(const std::vector<TokenId>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (TokenId t : v) {
      h ^= t;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

struct ContextCounts {
  std::uint64_t total = 0;
  std::unordered_map<TokenId, std::uint64_t> next;
};

}  // namespace detail

class NGramModel final : public SequenceModel {
 public:
  NGramModel(Vocab vocab, NGramConfig config) : vocab_(std::move(vocab)), config_(std::move(config)) {
    if (config_.order < 1) throw InvalidArgument("n-gram order must be >= 1");
    if (config_.smoothing == Smoothing::kAddK && !(config_.k > 0)) {
      throw InvalidArgument("add-k smoothing requires k > 0");
    }
    if (config_.smoothing == Smoothing::kInterpolated) {
      const auto w = config_.effective_weights();
      if (w.size() != static_cast<std::size_t>(config_.order) + 1) {
        throw InvalidArgument("interpolation needs order+1 weights");
      }
      const double s = std::accumulate(w.begin(), w.end(), 0.0);
      if (std::abs(s - 1.0) > 1e-9 || w[0] <= 0 ||
          std::any_of(w.begin(), w.end(), [](double x) { return x < 0; })) {
        throw InvalidArgument("interpolation weights must be >= 0, sum to 1, uniform weight > 0");
      }
      weights_ = w;
    }
    tables_.resize(static_cast<std::size_t>(config_.order));
  }

  void observe(const std::vector<TokenId>& seq) {
    const std::size_t n = static_cast<std::size_t>(config_.order);
    std::vector<TokenId> ctx;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      for (std::size_t len = 0; len < n && len <= i; ++len) {
        ctx.assign(seq.begin() + static_cast<std::ptrdiff_t>(i - len),
                   seq.begin() + static_cast<std::ptrdiff_t>(i));
        auto& c = tables_[len][ctx];
        ++c.total;
        ++c.next[seq[i]];
      }
    }
  }

  const Vocab& vocab() const override { return vocab_; }
  const NGramConfig& config() const { return config_; }

  std::vector<double> next_distribution(std::span<const TokenId> prefix) const override {
    const double v = static_cast<double>(vocab_.size());
    std::vector<double> p(vocab_.size());
    const std::size_t max_len =
        std::min<std::size_t>(prefix.size(), static_cast<std::size_t>(config_.order) - 1);
    if (config_.smoothing == Smoothing::kAddK) {
      const auto* c = lookup(prefix, max_len);
      const double total = c ? static_cast<double>(c->total) : 0.0;
      const double denom = total + config_.k * v;
      std::fill(p.begin(), p.end(), config_.k / denom);
      if (c) {
        for (const auto& [w, n] : c->next) p[w] += static_cast<double>(n) / denom;
      }
      return p;
    }
    double uniform = weights_[0];
    for (std::size_t len = 0; len <= max_len; ++len) {
      const auto* c = lookup(prefix, len);
      const double lambda = weights_[len + 1];
      if (!c || c->total == 0) {
        uniform += lambda;
        continue;
      }
      const double scale = lambda / static_cast<double>(c->total);
      for (const auto& [w, n] : c->next) p[w] += scale * static_cast<double>(n);
    }
    // Orders above the available context length also fall back to uniform.
    for (std::size_t len = max_len + 1; len < static_cast<std::size_t>(config_.order); ++len) {
      uniform += weights_[len + 1];
    }
    for (double& x : p) x += uniform / v;
    return p;
  }

  double log_prob(std::span<const TokenId> prefix, TokenId next) const override {
    const double v = static_cast<double>(vocab_.size());
    const std::size_t max_len =
        std::min<std::size_t>(prefix.size(), static_cast<std::size_t>(config_.order) - 1);
    if (config_.smoothing == Smoothing::kAddK) {
      const auto* c = lookup(prefix, max_len);
      double num = config_.k, total = 0.0;
      if (c) {
        total = static_cast<double>(c->total);
        if (const auto it = c->next.find(next); it != c->next.end()) {
          num += static_cast<double>(it->second);
        }
      }
      return std::log(num / (total + config_.k * v));
    }
    return std::log(next_distribution(prefix).at(next));
  }

  // Raw count c(h, w) for a context of any length below the order.
  std::uint64_t count(const std::vector<TokenId>& context, TokenId next) const {
    if (context.size() >= tables_.size()) return 0;
    const auto& t = tables_[context.size()];
    const auto it = t.find(context);
    if (it == t.end()) return 0;
    const auto jt = it->second.next.find(next);
    return jt == it->second.next.end() ? 0 : jt->second;
  }

  // Versioned JSON dump with tables sorted by context, then token id, so
  // identical models serialize to identical bytes.
  nlohmann::json to_json() const {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& table : tables_) {
      std::map<std::vector<TokenId>, const detail::ContextCounts*> sorted;
      for (const auto& [ctx, c] : table) sorted.emplace(ctx, &c);
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& [ctx, c] : sorted) {
        std::map<TokenId, std::uint64_t> next(c->next.begin(), c->next.end());
        nlohmann::json counts = nlohmann::json::array();
        for (const auto& [w, n] : next) counts.push_back({w, n});
        rows.push_back({{"context", ctx}, {"counts", std::move(counts)}});
      }
      tables.push_back(std::move(rows));
    }
    nlohmann::json smoothing;
    if (config_.smoothing == Smoothing::kAddK) {
      smoothing = {{"kind", "add-k"}, {"k", config_.k}};
    } else {
      smoothing = {{"kind", "interpolated"}, {"weights", weights_}};
    }
    return {{"format", "sbf-ngram"}, {"version", 1},        {"order", config_.order},
            {"smoothing", smoothing},  {"words", vocab_.words()}, {"tables", std::move(tables)}};
  }

  static NGramModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "sbf-ngram") throw IoError("model: not an sbf-ngram file");
      if (j.at("version") != 1) throw IoError("model: unsupported version");
      NGramConfig cfg;
      cfg.order = j.at("order").get<int>();
      const auto& sm = j.at("smoothing");
      if (sm.at("kind") == "add-k") {
        cfg.smoothing = Smoothing::kAddK;
        cfg.k = sm.at("k").get<double>();
      } else if (sm.at("kind") == "interpolated") {
        cfg.smoothing = Smoothing::kInterpolated;
        cfg.weights = sm.at("weights").get<std::vector<double>>();
      } else {
        throw IoError("model: unknown smoothing kind");
      }
      NGramModel m(Vocab(j.at("words").get<std::vector<std::string>>()), cfg);
      const auto& tables = j.at("tables");
      if (tables.size() != m.tables_.size()) throw IoError("model: table count != order");
      for (std::size_t len = 0; len < tables.size(); ++len) {
        for (const auto& row : tables[len]) {
          auto ctx = row.at("context").get<std::vector<TokenId>>();
          if (ctx.size() != len) throw IoError("model: context length mismatch");
          auto& c = m.tables_[len][ctx];
          for (const auto& pair : row.at("counts")) {
            const auto w = pair.at(0).get<TokenId>();
            const auto n = pair.at(1).get<std::uint64_t>();
            if (w >= m.vocab_.size()) throw IoError("model: token id out of range");
            c.next[w] += n;
            c.total += n;
          }
        }
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("model: malformed JSON: ") + e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model '" + path + "'");
    out << to_json().dump() << "\n";
  }

  static NGramModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("model: malformed JSON: ") + e.what());
    }
    return from_json(j);
  }

 private:
  const detail::ContextCounts* lookup(std::span<const TokenId> prefix, std::size_t len) const {
    const auto& t = tables_[len];
    std::vector<TokenId> key(prefix.end() - static_cast<std::ptrdiff_t>(len), prefix.end());
    const auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  }

  Vocab vocab_;
  NGramConfig config_;
  std::vector<double> weights_;
  std::vector<std::unordered_map<std::vector<TokenId>, detail::ContextCounts, detail::ContextHash>>
      tables_;
};

// Trains on already-linearized frames with a given vocabulary.
inline NGramModel train(const std::vector<LinearFrame>& frames, const Vocab& vocab,
                        const NGramConfig& config) {
  if (config.order < 1) throw InvalidArgument("n-gram order must be >= 1");
  if (frames.empty()) throw InvalidArgument("train: empty training set");
  NGramModel m(vocab, config);
  for (const auto& f : frames) m.observe(vocab.encode(f.tokens));
  return m;
}

// Trains with a vocabulary collected from the frames themselves.
inline NGramModel train(const std::vector<LinearFrame>& frames, const NGramConfig& config = {}) {
  if (config.order < 1) throw InvalidArgument("n-gram order must be >= 1");
  if (frames.empty()) throw InvalidArgument("train: empty training set");
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(frames.size());
  for (const auto& f : frames) seqs.push_back(f.tokens);
  return train(frames, Vocab::from_sequences(seqs), config);
}

}  // namespace sbf

#endif  // SBF_NGRAM_HPP
