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

// Frame <-> token sequence conversion. A linearized frame is
//
//   [STR] post... [SEP] [lewd] [off] [int] [grp] [SEP] group... [SEP]
//   statement... [SEP] [ing] [END]
//
// with exactly four [SEP] tokens. Frames without a targeted group keep all
// delimiters and leave the group and statement segments empty.

#ifndef SBF_LINEARIZER_HPP
#define SBF_LINEARIZER_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sbf/error.hpp"
#include "sbf/frame.hpp"
#include "sbf/text.hpp"
#include "sbf/vocab.hpp"

namespace sbf {

// The model-facing content of one training instance: post tokens, the five
// binary class values (nullopt = unparsed), and a single group/statement.
struct FrameFields {
  std::vector<std::string> post;
  std::array<std::optional<bool>, kNumVariables> classes{};  // indexed by Variable
  std::vector<std::string> group;
  std::vector<std::string> statement;

  std::optional<bool> value(Variable v) const { return classes[static_cast<std::size_t>(v)]; }
  void set(Variable v, std::optional<bool> b) { classes[static_cast<std::size_t>(v)] = b; }

  friend bool operator==(const FrameFields&, const FrameFields&) = default;
};

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct LinearFrame {
  std::vector<std::string> tokens;
  // Spans cover the tokens between delimiters; class_block holds the four
  // class tokens, ingroup the single [ing*] token.
  Span post, class_block, group, statement, ingroup;
};

// Order of the four class tokens inside the class block. The default follows
// the annotation flow; other permutations are accepted but non-default.
struct LinearizeOptions {
  std::array<Variable, 4> class_order = {Variable::kLewd, Variable::kOffensive, Variable::kIntent,
                                         Variable::kGroup};
};

namespace detail {

inline void check_class_order(const LinearizeOptions& opts) {
  std::array<Variable, 4> sorted = opts.class_order;
  std::sort(sorted.begin(), sorted.end());
  const std::array<Variable, 4> expected = {Variable::kOffensive, Variable::kIntent,
                                            Variable::kLewd, Variable::kGroup};
  if (sorted != expected) {
    throw InvalidArgument(
        "class order must be a permutation of lewd, offensive, intent, group");
  }
}

}  // namespace detail

// Post and phrase tokenization, control tokens escaped first.
inline std::vector<std::string> model_tokens(std::string_view text) {
  return tokenize(escape_control_tokens(text));
}

// One instance per (group, statement) pair; a group without statements
// yields one instance with an empty statement; no targets yields one
// instance with empty group and statement.
inline std::vector<FrameFields> expand_instances(std::string_view post_text,
                                                 const FrameAnnotation& a) {
  FrameFields base;
  base.post = model_tokens(post_text);
  for (Variable v : kAllVariables) base.set(v, a.bit(v) == 1);
  std::vector<FrameFields> out;
  if (a.targets.empty()) {
    out.push_back(base);
    return out;
  }
  for (const auto& t : a.targets) {
    FrameFields f = base;
    f.group = model_tokens(t.group_name);
    if (t.statements.empty()) {
      out.push_back(f);
      continue;
    }
    for (const auto& s : t.statements) {
      FrameFields g = f;
      g.statement = model_tokens(s);
      out.push_back(std::move(g));
    }
  }
  return out;
}

// First training instance of an annotation.
inline FrameFields fields_from_annotation(std::string_view post_text, const FrameAnnotation& a) {
  return expand_instances(post_text, a).front();
}

inline LinearFrame linearize(const FrameFields& f, const LinearizeOptions& opts = {}) {
  detail::check_class_order(opts);
  auto is_plain = [](const std::vector<std::string>& seg) {
    return std::none_of(seg.begin(), seg.end(),
                        [](const std::string& t) { return Vocab::is_reserved_string(t); });
  };
  if (!is_plain(f.post) || !is_plain(f.group) || !is_plain(f.statement)) {
    throw InvalidArgument("linearize: text segments must not contain reserved tokens");
  }
  for (Variable v : kAllVariables) {
    if (!f.value(v)) {
      throw InvalidArgument("linearize: variable " + std::string(to_string(v)) + " has no value");
    }
  }
  LinearFrame out;
  auto& t = out.tokens;
  t.reserve(f.post.size() + f.group.size() + f.statement.size() + 12);
  t.emplace_back(kStartToken);
  out.post.begin = t.size();
  t.insert(t.end(), f.post.begin(), f.post.end());
  out.post.end = t.size();
  t.emplace_back(kSepToken);
  out.class_block.begin = t.size();
  for (Variable v : opts.class_order) t.emplace_back(class_token(v, *f.value(v)));
  out.class_block.end = t.size();
  t.emplace_back(kSepToken);
  out.group.begin = t.size();
  t.insert(t.end(), f.group.begin(), f.group.end());
  out.group.end = t.size();
  t.emplace_back(kSepToken);
  out.statement.begin = t.size();
  t.insert(t.end(), f.statement.begin(), f.statement.end());
  out.statement.end = t.size();
  t.emplace_back(kSepToken);
  out.ingroup.begin = t.size();
  t.emplace_back(class_token(Variable::kIngroup, *f.value(Variable::kIngroup)));
  out.ingroup.end = t.size();
  t.emplace_back(kEndToken);
  return out;
}

struct ParseOptions {
  bool recovery = true;
};

struct ParsedFrame {
  FrameFields fields;
  // Token index of the class token that supplied each variable.
  std::array<std::optional<std::size_t>, kNumVariables> class_positions{};
  bool recovered = false;
  std::vector<std::string> notes;  // one entry per recovery action
};

// Inverse of linearize() with recovery for imperfect model output:
//  - missing [END]: end of sequence acts as [END];
//  - missing class tokens: the variable stays unparsed;
//  - surplus [SEP]s: the first text segment is the group, every later one
//    is folded into the statement;
//  - stray reserved tokens inside text segments are dropped.
// Without a leading [STR] parsing always fails.
inline ParsedFrame parse(const std::vector<std::string>& tokens, const ParseOptions& opts = {}) {
  if (tokens.empty() || tokens.front() != kStartToken) {
    throw ParseError("sequence does not start with [STR]");
  }
  ParsedFrame out;
  auto recover = [&](std::string note) {
    if (!opts.recovery) throw ParseError(note);
    out.recovered = true;
    out.notes.push_back(std::move(note));
  };

  std::size_t end = std::find(tokens.begin() + 1, tokens.end(), kEndToken) - tokens.begin();
  if (end == tokens.size()) recover("missing [END]");

  // Segments between [SEP]s, as [begin, end) index ranges.
  std::vector<Span> pieces;
  std::size_t start = 1;
  for (std::size_t i = 1; i < end; ++i) {
    if (tokens[i] == kSepToken) {
      pieces.push_back({start, i});
      start = i + 1;
    }
  }
  pieces.push_back({start, end});

  auto text_of = [&](Span s, std::vector<std::string>& dst) {
    for (std::size_t i = s.begin; i < s.end; ++i) {
      if (Vocab::is_reserved_string(tokens[i]) && tokens[i] != kUnkToken) {
        recover("dropped reserved token " + tokens[i] + " from text");
        continue;
      }
      dst.push_back(tokens[i]);
    }
  };

  text_of(pieces[0], out.fields.post);
  if (pieces.size() == 1) {
    recover("missing class block");
    return out;
  }

  const Span block = pieces[1];
  std::size_t seen = 0;
  for (std::size_t i = block.begin; i < block.end; ++i) {
    const auto info = class_token_info(tokens[i]);
    if (!info || info->variable == Variable::kIngroup) {
      recover("unexpected token " + tokens[i] + " in class block");
      continue;
    }
    auto& slot = out.fields.classes[static_cast<std::size_t>(info->variable)];
    if (slot) {
      recover("repeated class token " + tokens[i]);
      continue;
    }
    slot = info->positive;
    out.class_positions[static_cast<std::size_t>(info->variable)] = i;
    ++seen;
  }
  if (seen < 4) {
    if (!opts.recovery) throw ParseError("class block shorter than 4");
    for (Variable v : {Variable::kLewd, Variable::kOffensive, Variable::kIntent, Variable::kGroup}) {
      if (!out.fields.value(v)) recover(std::string(to_string(v)) + " unparsed");
    }
  }

  std::vector<Span> rest(pieces.begin() + 2, pieces.end());
  // The ingroup segment is the last one if it carries an [ing*] token.
  if (!rest.empty()) {
    const Span last = rest.back();
    std::optional<std::size_t> ing_at;
    for (std::size_t i = last.begin; i < last.end; ++i) {
      const auto info = class_token_info(tokens[i]);
      if (info && info->variable == Variable::kIngroup) {
        ing_at = i;
        break;
      }
    }
    if (ing_at) {
      out.fields.set(Variable::kIngroup, class_token_info(tokens[*ing_at])->positive);
      out.class_positions[static_cast<std::size_t>(Variable::kIngroup)] = *ing_at;
      if (last.size() != 1) recover("extra tokens in ingroup segment");
      rest.pop_back();
    }
  }
  if (!out.fields.value(Variable::kIngroup)) recover("ingroup unparsed");

  if (rest.size() != 2) {
    recover(rest.size() < 2 ? "missing [SEP] before ingroup" : "surplus [SEP] folded into statement");
  }
  if (!rest.empty()) text_of(rest[0], out.fields.group);
  for (std::size_t k = 1; k < rest.size(); ++k) text_of(rest[k], out.fields.statement);
  return out;
}

}  // namespace sbf

#endif  // SBF_LINEARIZER_HPP
