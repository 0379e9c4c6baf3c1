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

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "sbf/ngram.hpp"
#include "sbf/seqmodel.hpp"
#include "test_util.hpp"

namespace sbf {
namespace {

std::vector<LinearFrame> random_frames(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<LinearFrame> out;
  for (int i = 0; i < n; ++i) {
    const auto a = testing_util::random_valid_annotation(rng);
    for (const auto& f : expand_instances(testing_util::random_phrase(rng, 2, 12), a)) {
      out.push_back(linearize(f));
    }
  }
  return out;
}

double sum(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

TEST(NGram, BigramOracleABAB) {
  const Vocab v(std::vector<std::string>{"a", "b"});
  NGramModel m(v, {.order = 2, .smoothing = Smoothing::kAddK, .k = 0.01});
  const TokenId a = *v.find("a"), b = *v.find("b");
  m.observe({a, b, a, b});
  // Hand-counted table: c(a b) = 2, c(b a) = 1, c(a) as context = 2.
  EXPECT_EQ(m.count({a}, b), 2u);
  EXPECT_EQ(m.count({b}, a), 1u);
  EXPECT_EQ(m.count({a}, a), 0u);
  const std::vector<TokenId> ctx = {a};
  const auto p = m.next_distribution(ctx);
  const double V = static_cast<double>(v.size());
  EXPECT_NEAR(p[b], (2 + 0.01) / (2 + 0.01 * V), 1e-12);
  EXPECT_NEAR(p[a], 0.01 / (2 + 0.01 * V), 1e-12);
  EXPECT_EQ(std::max_element(p.begin(), p.end()) - p.begin(), static_cast<std::ptrdiff_t>(b));
  EXPECT_NEAR(std::exp(m.log_prob(ctx, b)), p[b], 1e-12);
}

TEST(NGram, DistributionsNormalizedAndPositive) {
  const auto frames = random_frames(1, 200);
  for (Smoothing s : {Smoothing::kAddK, Smoothing::kInterpolated}) {
    for (int order : {1, 2, 3, 4}) {
      NGramConfig cfg;
      cfg.order = order;
      cfg.smoothing = s;
      const auto m = train(frames, cfg);
      std::mt19937_64 rng(order);
      for (int trial = 0; trial < 50; ++trial) {
        const auto& ids = m.vocab().encode(frames[rng() % frames.size()].tokens);
        const std::size_t cut = rng() % ids.size();
        const auto p = m.next_distribution(std::span<const TokenId>(ids.data(), cut));
        ASSERT_EQ(p.size(), m.vocab().size());
        EXPECT_NEAR(sum(p), 1.0, 1e-9);
        EXPECT_GT(*std::min_element(p.begin(), p.end()), 0.0);
        const TokenId w = static_cast<TokenId>(rng() % p.size());
        EXPECT_NEAR(m.log_prob(std::span<const TokenId>(ids.data(), cut), w), std::log(p[w]), 1e-9);
      }
      // Unseen context.
      const std::vector<TokenId> odd = {Vocab::kEnd, Vocab::kEnd, Vocab::kEnd};
      EXPECT_NEAR(sum(m.next_distribution(odd)), 1.0, 1e-9);
    }
  }
}

TEST(NGram, DeterministicAndSerializable) {
  const auto frames = random_frames(2, 100);
  const auto m1 = train(frames);
  const auto m2 = train(frames);
  EXPECT_EQ(m1.to_json().dump(), m2.to_json().dump());
  const auto back = NGramModel::from_json(nlohmann::json::parse(m1.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), m1.to_json().dump());
  const auto ids = m1.vocab().encode(frames[3].tokens);
  EXPECT_EQ(back.next_distribution(std::span<const TokenId>(ids.data(), 5)),
            m1.next_distribution(std::span<const TokenId>(ids.data(), 5)));

  const auto dir = testing_util::scratch_dir("ngram");
  m1.save((dir / "m.json").string());
  EXPECT_EQ(NGramModel::load((dir / "m.json").string()).to_json(), m1.to_json());
  EXPECT_THROW(NGramModel::from_json({{"format", "other"}}), IoError);
}

TEST(NGram, TrainErrors) {
  EXPECT_THROW(train({}, NGramConfig{}), InvalidArgument);
  EXPECT_THROW(train(random_frames(3, 2), NGramConfig{.order = 0}), InvalidArgument);
  NGramConfig bad;
  bad.smoothing = Smoothing::kInterpolated;
  bad.weights = {0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(train(random_frames(3, 2), bad), InvalidArgument);
}

TEST(Loss, UniformModelIsLogV) {
  const auto frames = random_frames(4, 20);
  const auto m = train(frames);
  const UniformModel u(m.vocab());
  const double lnv = std::log(static_cast<double>(m.vocab().size()));
  for (const auto& f : frames) EXPECT_NEAR(sequence_loss(u, f, full_mask(f)), lnv, 1e-12);
}

TEST(Loss, ThreeTokenHandComputation) {
  const Vocab v(std::vector<std::string>{"x"});
  const std::size_t V = v.size();
  // p(next) puts 1/2, 1/4, 1/8 on the true token at prefix lengths 0, 1, 2.
  const std::vector<TokenId> seq = {Vocab::kStart, 14, Vocab::kEnd};
  const testing_util::FunctionModel m(v, [&](std::span<const TokenId> prefix) {
    const double target = std::pow(0.5, static_cast<double>(prefix.size()) + 1);
    std::vector<double> p(V, (1.0 - target) / static_cast<double>(V - 1));
    p[seq[prefix.size()]] = target;
    return p;
  });
  // -(1/3)(ln 1/2 + ln 1/4 + ln 1/8) = 2 ln 2.
  EXPECT_NEAR(sequence_loss(m, seq, LossMask{{1, 1, 1}}), 2.0 * std::log(2.0), 1e-12);
  // Only the middle position: ln 4.
  EXPECT_NEAR(sequence_loss(m, seq, LossMask{{0, 1, 0}}), std::log(4.0), 1e-12);
  EXPECT_THROW(sequence_loss(m, seq, LossMask{{0, 0, 0}}), InvalidArgument);
  EXPECT_THROW(sequence_loss(m, seq, LossMask{{1, 1}}), InvalidArgument);
}

TEST(Loss, MaskMatchesPostAndClassOnlyEvaluation) {
  const auto frames = random_frames(5, 60);
  const auto m = train(frames);
  FrameFields f;
  f.post = tokenize("so why are they");
  for (Variable v : kAllVariables) f.set(v, false);
  const auto lf = linearize(f);
  const auto mask = make_loss_mask(lf, f);
  // The [grp] token and the group, statement and ingroup segments carry no loss.
  const auto ids = m.vocab().encode(lf.tokens);
  double total = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const bool masked = lf.group.contains(i) || lf.statement.contains(i) ||
                        lf.ingroup.contains(i) || lf.tokens[i] == "[grpN]";
    EXPECT_EQ(mask.weights[i], masked ? 0 : 1) << i << " " << lf.tokens[i];
    if (masked) continue;
    total -= m.log_prob(std::span<const TokenId>(ids.data(), i), ids[i]);
    ++n;
  }
  EXPECT_NEAR(sequence_loss(m, lf, mask), total / static_cast<double>(n), 1e-12);

  f.set(Variable::kOffensive, true);
  f.set(Variable::kGroup, true);
  f.group = tokenize("women");
  const auto lf2 = linearize(f);
  EXPECT_EQ(make_loss_mask(lf2, f).active(), lf2.tokens.size());
}

TEST(Loss, NonIncreasingAsKShrinks) {
  const auto frames = random_frames(6, 80);
  double prev = std::numeric_limits<double>::infinity();
  for (double k : {1.0, 0.3, 0.1, 0.03, 0.01, 0.001, 1e-4}) {
    const auto m = train(frames, NGramConfig{.order = 3, .k = k});
    double loss = 0;
    for (const auto& f : frames) loss += sequence_loss(m, f, full_mask(f));
    loss /= static_cast<double>(frames.size());
    EXPECT_LE(loss, prev + 1e-12) << "k=" << k;
    prev = loss;
  }
}

TEST(NGram, ClassTokensPreferredAtClassPositions) {
  const auto frames = random_frames(7, 300);
  const auto m = train(frames);
  const auto probe = random_frames(8, 50);
  for (const auto& f : probe) {
    const auto ids = m.vocab().encode(f.tokens);
    for (std::size_t i = f.class_block.begin; i < f.class_block.end; ++i) {
      const auto p = m.next_distribution(std::span<const TokenId>(ids.data(), i));
      const auto info = class_token_info(f.tokens[i]);
      ASSERT_TRUE(info);
      const double cls = std::max(p[m.vocab().class_id(info->variable, true)],
                                  p[m.vocab().class_id(info->variable, false)]);
      double best_word = 0;
      for (TokenId w = Vocab::kNumReserved; w < p.size(); ++w) best_word = std::max(best_word, p[w]);
      EXPECT_GT(cls, best_word);
    }
  }
}

}  // namespace
}  // namespace sbf
