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

#ifndef SBF_SEQMODEL_HPP
#define SBF_SEQMODEL_HPP

#include <cmath>
#include <span>
#include <vector>

#include "sbf/error.hpp"
#include "sbf/linearizer.hpp"
#include "sbf/vocab.hpp"

namespace sbf {

// Forward-only model: the distribution over the next token depends only on
// the tokens before it. Implementations must return a full distribution
// over vocab() that sums to 1 and is strictly positive, and must be safe to
// call concurrently.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual const Vocab& vocab() const = 0;
  virtual std::vector<double> next_distribution(std::span<const TokenId> prefix) const = 0;

  virtual double log_prob(std::span<const TokenId> prefix, TokenId next) const {
    return std::log(next_distribution(prefix).at(next));
  }
};

class UniformModel final : public SequenceModel {
 public:
  explicit UniformModel(Vocab vocab) : vocab_(std::move(vocab)) {}

  const Vocab& vocab() const override { return vocab_; }
  std::vector<double> next_distribution(std::span<const TokenId>) const override {
    return std::vector<double>(vocab_.size(), 1.0 / static_cast<double>(vocab_.size()));
  }

 private:
  Vocab vocab_;
};

// Per-position loss weights, one per token of a LinearFrame.
struct LossMask {
  std::vector<int> weights;  // each 0 or 1

  std::size_t active() const {
    std::size_t n = 0;
    for (int w : weights) n += w ? 1 : 0;
    return n;
  }
};

// Zero weight exactly where a lower-level variable has no value: the [grp]
// token when the post is not offensive, and the group, statement and [ing]
// positions when no group is targeted.
inline LossMask make_loss_mask(const LinearFrame& lf, const FrameFields& fields) {
  LossMask m;
  m.weights.assign(lf.tokens.size(), 1);
  const bool offensive = fields.value(Variable::kOffensive).value_or(false);
  const bool group = fields.value(Variable::kGroup).value_or(false);
  if (!offensive) {
    for (std::size_t i = lf.class_block.begin; i < lf.class_block.end; ++i) {
      if (lf.tokens[i] == class_token(Variable::kGroup, false) ||
          lf.tokens[i] == class_token(Variable::kGroup, true)) {
        m.weights[i] = 0;
      }
    }
  }
  if (!group) {
    for (Span s : {lf.group, lf.statement, lf.ingroup}) {
      for (std::size_t i = s.begin; i < s.end; ++i) m.weights[i] = 0;
    }
  }
  return m;
}

inline LossMask full_mask(const LinearFrame& lf) { return LossMask{std::vector<int>(lf.tokens.size(), 1)}; }

// Mean negative log-likelihood over positions with weight 1; the divisor is
// the number of such positions.
inline double sequence_loss(const SequenceModel& model, const std::vector<TokenId>& ids,
                            const LossMask& mask) {
  if (mask.weights.size() != ids.size()) {
    throw InvalidArgument("sequence_loss: mask length differs from sequence length");
  }
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!mask.weights[i]) continue;
    total -= model.log_prob(std::span<const TokenId>(ids.data(), i), ids[i]);
    ++n;
  }
  if (n == 0) throw InvalidArgument("sequence_loss: mask has no active positions");
  return total / static_cast<double>(n);
}

inline double sequence_loss(const SequenceModel& model, const LinearFrame& lf,
                            const LossMask& mask) {
  return sequence_loss(model, model.vocab().encode(lf.tokens), mask);
}

}  // namespace sbf

#endif  // SBF_SEQMODEL_HPP
