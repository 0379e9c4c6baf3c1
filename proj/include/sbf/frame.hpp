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

// Frame variables, their answer scales, the annotation hierarchy, and the
// binarize/aggregate rules that turn worker answers into consensus labels.
//
// The annotation hierarchy:
//
//   offensive (yes/maybe/no)     always asked
//   intent    (yes/probably/probably-not/no)   always asked
//   lewd      (yes/maybe/no)     always asked
//   group     (yes/no)           only when offensive is yes or maybe
//   targets   (group + 0..4 statements)  only when group is yes
//   ingroup   (yes/maybe/no)     only when at least one target exists

#ifndef SBF_FRAME_HPP
#define SBF_FRAME_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbf/error.hpp"
#include "sbf/text.hpp"

namespace sbf {

enum class Variable { kOffensive = 0, kIntent, kLewd, kGroup, kIngroup };

inline constexpr std::size_t kNumVariables = 5;

inline constexpr std::array<Variable, kNumVariables> kAllVariables = {
    Variable::kOffensive, Variable::kIntent, Variable::kLewd, Variable::kGroup,
    Variable::kIngroup};

enum class Label { kYes, kMaybe, kNo, kProbably, kProbablyNot };

enum class Source { kReddit, kTwitter, kHateSite, kOther };

inline std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::kOffensive: return "offensive";
    case Variable::kIntent: return "intent";
    case Variable::kLewd: return "lewd";
    case Variable::kGroup: return "group";
    case Variable::kIngroup: return "ingroup";
  }
  return "?";
}

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::kYes: return "yes";
    case Label::kMaybe: return "maybe";
    case Label::kNo: return "no";
    case Label::kProbably: return "probably";
    case Label::kProbablyNot: return "probably-not";
  }
  return "?";
}

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::kReddit: return "reddit";
    case Source::kTwitter: return "twitter";
    case Source::kHateSite: return "hate-site";
    case Source::kOther: return "other";
  }
  return "other";
}

inline Source parse_source(std::string_view s) {
  const std::string n = normalize_phrase(s);
  if (n == "reddit") return Source::kReddit;
  if (n == "twitter" || n == "t/davidson" || n == "t/founta" || n == "t/waseem") {
    return Source::kTwitter;
  }
  if (n == "hate-site" || n == "gab" || n == "stormfront") return Source::kHateSite;
  if (n.rfind("r/", 0) == 0) return Source::kReddit;
  if (n.rfind("t/", 0) == 0) return Source::kTwitter;
  return Source::kOther;
}

inline std::optional<Variable> parse_variable(std::string_view s) {
  for (Variable v : kAllVariables) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

inline std::optional<Label> parse_label(std::string_view s) {
  static constexpr std::array<Label, 5> kLabels = {Label::kYes, Label::kMaybe, Label::kNo,
                                                   Label::kProbably, Label::kProbablyNot};
  for (Label l : kLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

// Whether `label` belongs to the answer scale of `var`.
inline bool is_legal(Variable var, Label label) {
  switch (var) {
    case Variable::kOffensive:
    case Variable::kLewd:
    case Variable::kIngroup:
      return label == Label::kYes || label == Label::kMaybe || label == Label::kNo;
    case Variable::kIntent:
      return label == Label::kYes || label == Label::kProbably ||
             label == Label::kProbablyNot || label == Label::kNo;
    case Variable::kGroup:
      return label == Label::kYes || label == Label::kNo;
  }
  return false;
}

inline std::vector<Label> scale_of(Variable var) {
  switch (var) {
    case Variable::kIntent:
      return {Label::kYes, Label::kProbably, Label::kProbablyNot, Label::kNo};
    case Variable::kGroup:
      return {Label::kYes, Label::kNo};
    default:
      return {Label::kYes, Label::kMaybe, Label::kNo};
  }
}

struct CategoricalAnswer {
  Variable variable;
  Label value;

  // Parses a scale label, rejecting labels outside the variable's scale.
  static CategoricalAnswer parse(Variable var, std::string_view label) {
    const auto l = parse_label(label);
    if (!l || !is_legal(var, *l)) {
      throw ValidationError("illegal label '" + std::string(label) + "' for variable " +
                            std::string(to_string(var)));
    }
    return {var, *l};
  }

  friend bool operator==(const CategoricalAnswer&, const CategoricalAnswer&) = default;
};

// 1 for yes/probably/maybe, 0 for every other legal label.
inline int binarize(const CategoricalAnswer& answer) {
  if (!is_legal(answer.variable, answer.value)) {
    throw ValidationError("illegal label '" + std::string(to_string(answer.value)) +
                          "' for variable " + std::string(to_string(answer.variable)));
  }
  switch (answer.value) {
    case Label::kYes:
    case Label::kProbably:
    case Label::kMaybe:
      return 1;
    default:
      return 0;
  }
}

inline int binarize(Variable var, Label label) { return binarize(CategoricalAnswer{var, label}); }

struct Post {
  std::string id;
  std::string text;
  Source source = Source::kOther;

  friend bool operator==(const Post&, const Post&) = default;
};

struct TargetPair {
  std::string group_name;  // normalized
  std::vector<std::string> statements;

  TargetPair() = default;
  TargetPair(std::string_view group, std::vector<std::string> stmts)
      : group_name(normalize_phrase(group)), statements(std::move(stmts)) {}

  friend bool operator==(const TargetPair&, const TargetPair&) = default;
};

struct FrameAnnotation {
  std::string post_id;
  std::string worker_id;
  Label offensive = Label::kNo;
  Label intent = Label::kNo;
  Label lewd = Label::kNo;
  std::optional<Label> group;  // absent when the question was not asked
  std::vector<TargetPair> targets;
  std::optional<Label> ingroup;

  // Label for `var`, or nullopt when the question was not asked.
  std::optional<Label> answer(Variable var) const {
    switch (var) {
      case Variable::kOffensive: return offensive;
      case Variable::kIntent: return intent;
      case Variable::kLewd: return lewd;
      case Variable::kGroup: return group;
      case Variable::kIngroup: return ingroup;
    }
    return std::nullopt;
  }

  // Binarized value; unasked questions count as 0.
  int bit(Variable var) const {
    const auto a = answer(var);
    return a ? binarize(var, *a) : 0;
  }

  friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

struct Violation {
  std::string field;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;  // legal but unusual, e.g. fewer than two statements

  bool ok() const { return violations.empty(); }
};

inline constexpr std::size_t kMaxStatementsPerGroup = 4;
inline constexpr std::size_t kRecommendedMinStatements = 2;

inline ValidationResult validate(const FrameAnnotation& a) {
  ValidationResult r;
  auto fail = [&](std::string field, std::string rule) {
    r.violations.push_back({std::move(field), std::move(rule)});
  };
  if (a.post_id.empty()) fail("post_id", "post_id must be non-empty");
  if (a.worker_id.empty()) fail("worker_id", "worker_id must be non-empty");
  for (Variable v : kAllVariables) {
    const auto ans = a.answer(v);
    if (ans && !is_legal(v, *ans)) {
      fail(std::string(to_string(v)),
           "illegal label '" + std::string(to_string(*ans)) + "' for " + std::string(to_string(v)));
    }
  }
  const bool potentially_offensive =
      a.offensive == Label::kYes || a.offensive == Label::kMaybe;
  if (a.group && !potentially_offensive) {
    fail("group", "group requires offensive in {yes, maybe}");
  }
  const bool group_yes = a.group == Label::kYes;
  if (!a.targets.empty() && !group_yes) fail("targets", "targets require group=yes");
  if (group_yes && a.targets.empty()) fail("targets", "group=yes requires at least one target");
  if (a.ingroup && a.targets.empty()) fail("ingroup", "ingroup requires non-empty targets");
  for (std::size_t i = 0; i < a.targets.size(); ++i) {
    const auto& t = a.targets[i];
    const std::string field = "targets[" + std::to_string(i) + "]";
    if (t.group_name.empty()) fail(field + ".group", "group name must be non-empty");
    if (t.group_name != normalize_phrase(t.group_name)) {
      fail(field + ".group", "group name must be normalized");
    }
    if (t.statements.size() > kMaxStatementsPerGroup) {
      fail(field + ".statements", "at most 4 statements per group");
    } else if (t.statements.size() < kRecommendedMinStatements) {
      r.warnings.push_back({field + ".statements", "fewer than 2 statements"});
    }
    for (std::size_t j = 0; j < t.statements.size(); ++j) {
      if (normalize_phrase(t.statements[j]).empty()) {
        fail(field + ".statements[" + std::to_string(j) + "]", "statement must be non-empty");
      }
    }
  }
  return r;
}

// Per-post consensus labels.
struct AggregatedFrame {
  std::string post_id;
  std::array<int, kNumVariables> labels{};  // indexed by Variable
  std::set<std::string> reference_groups;
  std::set<std::pair<std::string, std::string>> reference_statements;  // (group, statement)

  int label(Variable v) const { return labels[static_cast<std::size_t>(v)]; }

  friend bool operator==(const AggregatedFrame&, const AggregatedFrame&) = default;
};

inline AggregatedFrame aggregate(const std::vector<FrameAnnotation>& annotations) {
  if (annotations.empty()) throw InvalidArgument("aggregate: no annotations");
  AggregatedFrame out;
  out.post_id = annotations.front().post_id;
  std::array<int, kNumVariables> positives{};
  for (const auto& a : annotations) {
    if (a.post_id != out.post_id) {
      throw InvalidArgument("aggregate: mixed post ids '" + out.post_id + "' and '" + a.post_id +
                            "'");
    }
    for (Variable v : kAllVariables) positives[static_cast<std::size_t>(v)] += a.bit(v);
    for (const auto& t : a.targets) {
      const std::string g = normalize_phrase(t.group_name);
      if (g.empty()) continue;
      out.reference_groups.insert(g);
      for (const auto& s : t.statements) {
        const std::string n = normalize_phrase(s);
        if (!n.empty()) out.reference_statements.emplace(g, n);
      }
    }
  }
  // Consensus threshold 0.5 with ties positive, compared exactly as
  // pos/n >= 1/2  <=>  2*pos >= n.
  const int n = static_cast<int>(annotations.size());
  for (std::size_t i = 0; i < kNumVariables; ++i) out.labels[i] = 2 * positives[i] >= n ? 1 : 0;
  return out;
}

}  // namespace sbf

#endif  // SBF_FRAME_HPP
