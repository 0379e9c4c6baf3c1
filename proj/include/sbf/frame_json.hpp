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

// JSON form of a frame record, one object per line:
//
//   {"post_id": "...", "worker_id": "...",
//    "offensive": "yes|maybe|no", "intent": "yes|probably|probably-not|no",
//    "lewd": "yes|maybe|no", "group": "yes|no" | null,
//    "targets": [{"group": "...", "statements": ["..."]}],
//    "ingroup": "yes|maybe|no" | null}
//
// Readers also accept optional "post" (text) and "source" members.

#ifndef SBF_FRAME_JSON_HPP
#define SBF_FRAME_JSON_HPP

#include <optional>
#include <string>

#include "json.hpp"
#include "sbf/error.hpp"
#include "sbf/frame.hpp"

namespace sbf {

using json = nlohmann::json;

inline json to_json(const FrameAnnotation& a) {
  json targets = json::array();
  for (const auto& t : a.targets) {
    targets.push_back({{"group", t.group_name}, {"statements", t.statements}});
  }
  auto opt = [](const std::optional<Label>& l) -> json {
    return l ? json(std::string(to_string(*l))) : json(nullptr);
  };
  return json{{"post_id", a.post_id},
              {"worker_id", a.worker_id},
              {"offensive", std::string(to_string(a.offensive))},
              {"intent", std::string(to_string(a.intent))},
              {"lewd", std::string(to_string(a.lewd))},
              {"group", opt(a.group)},
              {"targets", std::move(targets)},
              {"ingroup", opt(a.ingroup)}};
}

namespace detail {

inline std::string required_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ValidationError(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

inline Label required_label(const json& j, Variable var) {
  const std::string key(to_string(var));
  return CategoricalAnswer::parse(var, required_string(j, key.c_str())).value;
}

inline std::optional<Label> optional_label(const json& j, Variable var) {
  const auto it = j.find(std::string(to_string(var)));
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError("field '" + std::string(to_string(var)) + "' must be a string or null");
  }
  return CategoricalAnswer::parse(var, it->get<std::string>()).value;
}

}  // namespace detail

// Structural decoding only: labels must be legal for their variable, but
// hierarchy rules are left to validate().
inline FrameAnnotation annotation_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("frame record must be a JSON object");
  FrameAnnotation a;
  a.post_id = detail::required_string(j, "post_id");
  a.worker_id = detail::required_string(j, "worker_id");
  a.offensive = detail::required_label(j, Variable::kOffensive);
  a.intent = detail::required_label(j, Variable::kIntent);
  a.lewd = detail::required_label(j, Variable::kLewd);
  a.group = detail::optional_label(j, Variable::kGroup);
  a.ingroup = detail::optional_label(j, Variable::kIngroup);
  if (const auto it = j.find("targets"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("field 'targets' must be an array");
    for (const auto& t : *it) {
      if (!t.is_object()) throw ValidationError("each target must be an object");
      std::vector<std::string> statements;
      if (const auto s = t.find("statements"); s != t.end() && !s->is_null()) {
        if (!s->is_array()) throw ValidationError("'statements' must be an array");
        for (const auto& x : *s) {
          if (!x.is_string()) throw ValidationError("statements must be strings");
          statements.push_back(x.get<std::string>());
        }
      }
      a.targets.emplace_back(detail::required_string(t, "group"), std::move(statements));
    }
  }
  return a;
}

inline json to_json(const ValidationResult& r) {
  json v = json::array();
  for (const auto& x : r.violations) v.push_back({{"field", x.field}, {"rule", x.rule}});
  json w = json::array();
  for (const auto& x : r.warnings) w.push_back({{"field", x.field}, {"rule", x.rule}});
  return json{{"ok", r.ok()}, {"violations", std::move(v)}, {"warnings", std::move(w)}};
}

inline json to_json(const AggregatedFrame& f) {
  json labels = json::object();
  for (Variable v : kAllVariables) labels[std::string(to_string(v))] = f.label(v);
  json statements = json::array();
  for (const auto& [g, s] : f.reference_statements) statements.push_back({g, s});
  return json{{"post_id", f.post_id},
              {"labels", std::move(labels)},
              {"reference_groups", f.reference_groups},
              {"reference_statements", std::move(statements)}};
}

}  // namespace sbf

#endif  // SBF_FRAME_JSON_HPP
