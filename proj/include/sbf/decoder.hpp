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

// Frame generation from a post: greedy decoding, best-of-N sampling, and
// constrained re-assignment of the categorical variables.

#ifndef SBF_DECODER_HPP
#define SBF_DECODER_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbf/error.hpp"
#include "sbf/frame.hpp"
#include "sbf/linearizer.hpp"
#include "sbf/seqmodel.hpp"
#include "sbf/vocab.hpp"

namespace sbf {

enum class DecodeMode { kGreedy, kSample };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kGreedy;
  int num_candidates = 10;
  // Total sequence length cap including the prompt; defaults to prompt + 64.
  std::optional<std::size_t> max_length = std::nullopt;
  double temperature = 1.0;  // <= 0 means argmax
  bool constrained = false;
  std::uint64_t seed = 0;
  // Rank sampled candidates by mean instead of total log-probability.
  bool length_normalized = false;
};

struct Repair {
  Variable variable;
  std::optional<bool> from;  // nullopt when the model output left it unparsed
  bool to = false;
  friend bool operator==(const Repair&, const Repair&) = default;
};

struct DecodedFrame {
  FrameFields fields;
  std::vector<std::string> tokens;  // full sequence, prompt included
  double score = 0.0;               // total log-probability of the generated tokens
  std::optional<double> assignment_score;  // constrained only: sum of chosen class log-probs
  std::vector<Repair> repairs;
  std::vector<std::string> text_repairs;
  bool recovered = false;
  std::vector<std::string> notes;
};

class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::vector<std::vector<std::string>> candidates)
      : Error(what), candidates_(std::move(candidates)) {}
  const std::vector<std::vector<std::string>>& candidates() const { return candidates_; }

 private:
  std::vector<std::vector<std::string>> candidates_;
};

// Log-probabilities of both class tokens of every variable at one step.
using ClassLogProbs = std::array<std::array<double, 2>, kNumVariables>;

// A generated sequence with the per-step class-token log-probabilities
// recorded during the same forward pass.
struct Candidate {
  std::vector<TokenId> ids;
  std::size_t prompt_length = 0;
  std::vector<ClassLogProbs> steps;  // steps[i] covers ids[prompt_length + i]
  double score = 0.0;
};

namespace detail {

inline std::vector<TokenId> build_prompt(const Vocab& vocab, const std::vector<std::string>& post) {
  if (post.empty()) throw InvalidArgument("decode: post has no tokens");
  std::vector<TokenId> ids;
  ids.reserve(post.size() + 2);
  ids.push_back(Vocab::kStart);
  bool any_known = false;
  for (const auto& t : post) {
    const TokenId id = vocab.id_or_unk(t);
    any_known = any_known || id != Vocab::kUnk;
    ids.push_back(id);
  }
  if (!any_known) throw InvalidArgument("decode: all post tokens are out of vocabulary");
  ids.push_back(Vocab::kSep);
  return ids;
}

inline std::size_t length_cap(const DecodeConfig& cfg, std::size_t post_len, std::size_t prompt) {
  if (cfg.max_length) {
    if (*cfg.max_length <= post_len + 10) {
      throw InvalidArgument("decode: max_length must exceed post length + 10");
    }
    return *cfg.max_length;
  }
  return prompt + 64;
}

inline ClassLogProbs class_log_probs(const Vocab& vocab, const std::vector<double>& dist) {
  ClassLogProbs out{};
  for (Variable v : kAllVariables) {
    for (int b = 0; b < 2; ++b) {
      out[static_cast<std::size_t>(v)][b] = std::log(dist[vocab.class_id(v, b == 1)]);
    }
  }
  return out;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline TokenId argmax(const std::vector<double>& dist) {
  TokenId best = 0;
  for (TokenId i = 1; i < dist.size(); ++i) {
    if (dist[i] > dist[best]) best = i;
  }
  return best;
}

inline TokenId sample(const std::vector<double>& dist, double temperature, std::mt19937_64& rng) {
  std::vector<double> w(dist.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    w[i] = std::log(dist[i]) / temperature;
    max_log = std::max(max_log, w[i]);
  }
  double total = 0.0;
  for (double& x : w) {
    x = std::exp(x - max_log);
    total += x;
  }
  const double u = unit_uniform(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(w.size() - 1);
}

template <class Choose>
Candidate generate(const SequenceModel& model, const std::vector<TokenId>& prompt,
                   std::size_t cap, Choose&& choose) {
  Candidate c;
  c.ids = prompt;
  c.prompt_length = prompt.size();
  while (c.ids.size() < cap) {
    const auto dist = model.next_distribution(std::span<const TokenId>(c.ids));
    const TokenId next = choose(dist);
    c.steps.push_back(class_log_probs(model.vocab(), dist));
    c.score += std::log(dist[next]);
    c.ids.push_back(next);
    if (next == Vocab::kEnd) break;
  }
  return c;
}

inline DecodedFrame to_decoded(const Vocab& vocab, const Candidate& c,
                               const std::vector<std::string>& post) {
  DecodedFrame d;
  d.tokens = vocab.decode(c.ids);
  ParsedFrame p = parse(d.tokens);
  d.fields = std::move(p.fields);
  d.fields.post = post;
  d.recovered = p.recovered;
  d.notes = std::move(p.notes);
  d.score = c.score;
  return d;
}

}  // namespace detail

inline Candidate generate_greedy(const SequenceModel& model, const std::vector<std::string>& post,
                                 const DecodeConfig& cfg = {}) {
  const auto prompt = detail::build_prompt(model.vocab(), post);
  const auto cap = detail::length_cap(cfg, post.size(), prompt.size());
  return detail::generate(model, prompt, cap, [](const auto& d) { return detail::argmax(d); });
}

inline DecodedFrame decode_greedy(const SequenceModel& model, const std::vector<std::string>& post,
                                  const DecodeConfig& cfg = {}) {
  return detail::to_decoded(model.vocab(), generate_greedy(model, post, cfg), post);
}

inline DecodedFrame decode_greedy(const SequenceModel& model, std::string_view post_text,
                                  const DecodeConfig& cfg = {}) {
  return decode_greedy(model, model_tokens(post_text), cfg);
}

// Draws cfg.num_candidates sequences and keeps the best-scoring one
// (first wins ties). Also returns the winning Candidate for re-scoring.
inline std::pair<DecodedFrame, Candidate> sample_best(const SequenceModel& model,
                                                      const std::vector<std::string>& post,
                                                      const DecodeConfig& cfg) {
  if (cfg.num_candidates < 1) throw InvalidArgument("decode: num_candidates must be >= 1");
  const auto prompt = detail::build_prompt(model.vocab(), post);
  const auto cap = detail::length_cap(cfg, post.size(), prompt.size());
  std::mt19937_64 rng(cfg.seed);
  std::optional<std::pair<DecodedFrame, Candidate>> best;
  double best_rank = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::string>> raw;
  for (int i = 0; i < cfg.num_candidates; ++i) {
    Candidate c = cfg.temperature <= 0
                      ? detail::generate(model, prompt, cap,
                                         [](const auto& d) { return detail::argmax(d); })
                      : detail::generate(model, prompt, cap, [&](const auto& d) {
                          return detail::sample(d, cfg.temperature, rng);
                        });
    raw.push_back(model.vocab().decode(c.ids));
    DecodedFrame d;
    try {
      d = detail::to_decoded(model.vocab(), c, post);
    } catch (const ParseError&) {
      continue;
    }
    const double generated = static_cast<double>(c.ids.size() - c.prompt_length);
    const double rank = cfg.length_normalized ? c.score / std::max(generated, 1.0) : c.score;
    if (!best || rank > best_rank) {
      best_rank = rank;
      best.emplace(std::move(d), std::move(c));
    }
  }
  if (!best) throw DecodeError("decode: no candidate could be parsed", std::move(raw));
  return std::move(*best);
}

inline DecodedFrame decode_sample(const SequenceModel& model, const std::vector<std::string>& post,
                                  const DecodeConfig& cfg) {
  return sample_best(model, post, cfg).first;
}

// --- constrained assignment ----------------------------------------------

// Binary assignment to the five variables, bit i = Variable(i).
using Assignment = std::array<bool, kNumVariables>;

// Whether an assignment fits the annotation hierarchy given the candidate's
// text fields:
//   group targeted      => offensive
//   in-group            => group targeted
//   group targeted     <=> non-empty group text
inline bool consistent(const Assignment& a, bool has_group_text) {
  const bool off = a[static_cast<std::size_t>(Variable::kOffensive)];
  const bool grp = a[static_cast<std::size_t>(Variable::kGroup)];
  const bool ing = a[static_cast<std::size_t>(Variable::kIngroup)];
  if (grp && !off) return false;
  if (ing && !grp) return false;
  return grp == has_group_text;
}

inline double assignment_score(const Assignment& a,
                               const std::array<std::array<double, 2>, kNumVariables>& lp) {
  double s = 0.0;
  for (std::size_t i = 0; i < kNumVariables; ++i) s += lp[i][a[i] ? 1 : 0];
  return s;
}

// Class-token log-probabilities for each variable, read at the position
// where the candidate emitted that variable's token. A variable the
// candidate never emitted uses its canonical slot when the candidate is
// long enough, otherwise an uninformative (0, 0).
inline std::array<std::array<double, 2>, kNumVariables> variable_log_probs(
    const Candidate& c, const ParsedFrame& parsed, const LinearizeOptions& opts = {}) {
  std::array<std::array<double, 2>, kNumVariables> lp{};
  for (Variable v : kAllVariables) {
    const auto vi = static_cast<std::size_t>(v);
    std::optional<std::size_t> pos = parsed.class_positions[vi];
    if (!pos && v != Variable::kIngroup) {
      for (std::size_t k = 0; k < opts.class_order.size(); ++k) {
        if (opts.class_order[k] == v) pos = c.prompt_length + k;
      }
    }
    if (pos && *pos >= c.prompt_length && *pos - c.prompt_length < c.steps.size()) {
      lp[vi] = c.steps[*pos - c.prompt_length][vi];
    } else {
      lp[vi] = {0.0, 0.0};
    }
  }
  return lp;
}

// Re-assigns the categorical variables of a candidate to the most probable
// assignment consistent with the hierarchy and with the candidate's text,
// scoring from the candidate's own forward pass. Ties prefer fewer repairs,
// then fewer positive labels.
inline DecodedFrame constrain(const SequenceModel& model, const Candidate& c,
                              const std::vector<std::string>& post) {
  DecodedFrame d = detail::to_decoded(model.vocab(), c, post);
  const ParsedFrame parsed = parse(d.tokens);
  const auto lp = variable_log_probs(c, parsed);

  // A statement without a group cannot be made consistent by any
  // assignment; that text is emptied instead.
  if (d.fields.group.empty() && !d.fields.statement.empty()) {
    d.fields.statement.clear();
    d.text_repairs.push_back("statement dropped: no group text");
  }
  const bool has_group = !d.fields.group.empty();

  std::optional<Assignment> best;
  double best_score = -std::numeric_limits<double>::infinity();
  int best_repairs = 0, best_positives = 0;
  for (unsigned mask = 0; mask < (1u << kNumVariables); ++mask) {
    Assignment a{};
    int positives = 0, repairs = 0;
    for (std::size_t i = 0; i < kNumVariables; ++i) {
      a[i] = (mask >> i) & 1u;
      positives += a[i] ? 1 : 0;
      const auto orig = d.fields.classes[i];
      repairs += (!orig || *orig != a[i]) ? 1 : 0;
    }
    if (!consistent(a, has_group)) continue;
    const double s = assignment_score(a, lp);
    const bool better = !best || s > best_score ||
                        (s == best_score && (repairs < best_repairs ||
                                             (repairs == best_repairs && positives < best_positives)));
    if (better) {
      best = a;
      best_score = s;
      best_repairs = repairs;
      best_positives = positives;
    }
  }
  if (!best) {
    // Unreachable: all-negative with empty text is always consistent, and
    // group text present admits off=grp=1.
    throw Error("constrain: no consistent assignment");
  }

  double score = c.score;
  for (std::size_t i = 0; i < kNumVariables; ++i) {
    const auto orig = d.fields.classes[i];
    const bool chosen = (*best)[i];
    if (!orig || *orig != chosen) {
      d.repairs.push_back({static_cast<Variable>(i), orig, chosen});
    }
    // Swap the emitted class token's log-probability for the chosen one.
    if (parsed.class_positions[i]) score += lp[i][chosen ? 1 : 0] - lp[i][*orig ? 1 : 0];
    d.fields.classes[i] = chosen;
  }
  d.score = score;
  d.assignment_score = best_score;
  return d;
}

inline DecodedFrame decode_constrained(const SequenceModel& model,
                                       const std::vector<std::string>& post,
                                       const DecodeConfig& cfg = {}) {
  return constrain(model, generate_greedy(model, post, cfg), post);
}

inline DecodedFrame decode_constrained(const SequenceModel& model, std::string_view post_text,
                                       const DecodeConfig& cfg = {}) {
  return decode_constrained(model, model_tokens(post_text), cfg);
}

// Dispatch on mode and constraint flag.
inline DecodedFrame decode(const SequenceModel& model, const std::vector<std::string>& post,
                           const DecodeConfig& cfg) {
  if (cfg.mode == DecodeMode::kGreedy) {
    return cfg.constrained ? decode_constrained(model, post, cfg) : decode_greedy(model, post, cfg);
  }
  auto [frame, cand] = sample_best(model, post, cfg);
  return cfg.constrained ? constrain(model, cand, post) : frame;
}

// Frame annotation implied by a decoded frame. Values are copied as-is, so
// an inconsistent model output yields an annotation that fails validate():
// group is present when offensive or group is positive, targets when group
// text exists, ingroup when targets exist or ingroup is positive.
inline FrameAnnotation to_annotation(const DecodedFrame& d, std::string post_id,
                                     std::string worker_id = "model") {
  auto yes = [&](Variable v) { return d.fields.value(v).value_or(false); };
  auto yn = [](bool b) { return b ? Label::kYes : Label::kNo; };
  FrameAnnotation a;
  a.post_id = std::move(post_id);
  a.worker_id = std::move(worker_id);
  a.offensive = yn(yes(Variable::kOffensive));
  a.intent = yn(yes(Variable::kIntent));
  a.lewd = yn(yes(Variable::kLewd));
  if (yes(Variable::kOffensive) || yes(Variable::kGroup)) a.group = yn(yes(Variable::kGroup));
  if (!d.fields.group.empty()) {
    TargetPair t(join(d.fields.group), {});
    if (!d.fields.statement.empty()) t.statements.push_back(join(d.fields.statement));
    a.targets.push_back(std::move(t));
  }
  if (!a.targets.empty() || yes(Variable::kIngroup)) a.ingroup = yn(yes(Variable::kIngroup));
  return a;
}

inline nlohmann::json to_json(const DecodedFrame& d, const std::string& post_id) {
  nlohmann::json classes = nlohmann::json::object();
  for (Variable v : kAllVariables) {
    const auto x = d.fields.value(v);
    classes[std::string(to_string(v))] = x ? nlohmann::json(*x ? 1 : 0) : nlohmann::json(nullptr);
  }
  nlohmann::json repairs = nlohmann::json::array();
  for (const auto& r : d.repairs) {
    repairs.push_back({{"variable", std::string(to_string(r.variable))},
                       {"from", r.from ? nlohmann::json(*r.from ? 1 : 0) : nlohmann::json(nullptr)},
                       {"to", r.to ? 1 : 0}});
  }
  nlohmann::json j = {{"post_id", post_id},
                      {"post", join(d.fields.post)},
                      {"classes", std::move(classes)},
                      {"group", join(d.fields.group)},
                      {"statement", join(d.fields.statement)},
                      {"score", d.score},
                      {"repairs", std::move(repairs)},
                      {"text_repairs", d.text_repairs},
                      {"recovered", d.recovered},
                      {"notes", d.notes},
                      {"tokens", d.tokens}};
  if (d.assignment_score) j["assignment_score"] = *d.assignment_score;
  return j;
}

// Reads back the fields evaluation needs (classes, group, statement, score).
inline std::pair<std::string, DecodedFrame> decoded_from_json(const nlohmann::json& j) {
  try {
    DecodedFrame d;
    const std::string post_id = j.at("post_id").get<std::string>();
    for (Variable v : kAllVariables) {
      const auto& x = j.at("classes").at(std::string(to_string(v)));
      if (!x.is_null()) d.fields.set(v, x.get<int>() != 0);
    }
    d.fields.post = tokenize(j.value("post", std::string()));
    d.fields.group = tokenize(j.value("group", std::string()));
    d.fields.statement = tokenize(j.value("statement", std::string()));
    d.score = j.value("score", 0.0);
    d.recovered = j.value("recovered", false);
    return {post_id, std::move(d)};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("decoded frame: malformed record: ") + e.what());
  }
}

}  // namespace sbf

#endif  // SBF_DECODER_HPP
