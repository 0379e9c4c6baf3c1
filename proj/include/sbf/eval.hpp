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

// Run-level evaluation: classification scores on the five binarized
// variables and generation scores for the group and statement fields.

#ifndef SBF_EVAL_HPP
#define SBF_EVAL_HPP

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbf/decoder.hpp"
#include "sbf/frame.hpp"
#include "sbf/metrics.hpp"
#include "sbf/wmd.hpp"

namespace sbf {

struct ClassReport {
  std::array<PRF1, kNumVariables> variables{};
  std::size_t posts = 0;

  const PRF1& operator[](Variable v) const { return variables[static_cast<std::size_t>(v)]; }
};

struct FieldScores {
  double bleu2 = 0.0;
  double rougeL_f1 = 0.0;
  std::optional<double> wmd;  // absent without embeddings or when nothing was scorable
  std::size_t scored = 0;     // posts with non-empty hypothesis and references
  std::size_t wmd_scored = 0;
  std::size_t wmd_skipped = 0;  // all-OOV on one side
  std::size_t oov_tokens = 0;   // hypothesis tokens dropped by the OOV policy
};

struct GenReport {
  FieldScores group;
  FieldScores statement;
};

struct EvalReport {
  ClassReport classification;
  GenReport generation;
};

inline constexpr std::string_view kEvalConventions =
    "BLEU-2: uniform 1-2 gram weights, max-ref clipping, closest-ref brevity penalty, zero "
    "precision floored at 1e-9, orders without hypothesis n-grams omitted; ROUGE-L: F1 "
    "(beta=1), max over references; WMD: Euclidean ground cost, OOV dropped, min over "
    "references; unparsed predictions count as negative";

namespace detail {

inline std::vector<Tokens> tokenized(const std::vector<std::string>& phrases) {
  std::vector<Tokens> out;
  for (const auto& p : phrases) {
    auto t = tokenize(p);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

inline void score_field(FieldScores& acc, const Tokens& hyp, const std::vector<Tokens>& refs,
                        const EmbeddingTable* emb) {
  if (hyp.empty() || refs.empty()) return;
  acc.bleu2 += bleu2(hyp, refs);
  acc.rougeL_f1 += rougeL_f1(hyp, refs);
  ++acc.scored;
  if (!emb) return;
  for (const auto& t : hyp) acc.oov_tokens += emb->find(t) ? 0 : 1;
  try {
    const auto r = wmd(hyp, refs, *emb);
    acc.wmd = acc.wmd.value_or(0.0) + r.distance;
    ++acc.wmd_scored;
  } catch (const InvalidArgument&) {
    ++acc.wmd_skipped;
  }
}

inline void finish_field(FieldScores& acc) {
  if (acc.scored) {
    acc.bleu2 /= static_cast<double>(acc.scored);
    acc.rougeL_f1 /= static_cast<double>(acc.scored);
  }
  if (acc.wmd && acc.wmd_scored) *acc.wmd /= static_cast<double>(acc.wmd_scored);
}

}  // namespace detail

// Every prediction must match a gold post and vice versa.
inline EvalReport evaluate_run(const std::vector<std::pair<std::string, DecodedFrame>>& decoded,
                               const std::vector<AggregatedFrame>& gold,
                               const EmbeddingTable* embeddings = nullptr) {
  std::map<std::string, const AggregatedFrame*> by_id;
  for (const auto& g : gold) by_id[g.post_id] = &g;
  std::map<std::string, const DecodedFrame*> pred;
  for (const auto& [id, d] : decoded) {
    if (!by_id.count(id)) throw InvalidArgument("evaluate_run: unmatched post_id '" + id + "'");
    if (!pred.emplace(id, &d).second) {
      throw InvalidArgument("evaluate_run: duplicate prediction for '" + id + "'");
    }
  }
  for (const auto& [id, g] : by_id) {
    if (!pred.count(id)) throw InvalidArgument("evaluate_run: no prediction for '" + id + "'");
  }
  if (pred.empty()) throw InvalidArgument("evaluate_run: empty run");

  EvalReport report;
  std::array<std::vector<int>, kNumVariables> p, y;
  for (const auto& [id, d] : pred) {
    const AggregatedFrame& g = *by_id.at(id);
    for (Variable v : kAllVariables) {
      const auto i = static_cast<std::size_t>(v);
      p[i].push_back(d->fields.value(v).value_or(false) ? 1 : 0);
      y[i].push_back(g.label(v));
    }
    std::vector<std::string> groups(g.reference_groups.begin(), g.reference_groups.end());
    std::vector<std::string> statements;
    for (const auto& [grp, s] : g.reference_statements) statements.push_back(s);
    detail::score_field(report.generation.group, d->fields.group, detail::tokenized(groups),
                        embeddings);
    detail::score_field(report.generation.statement, d->fields.statement,
                        detail::tokenized(statements), embeddings);
  }
  for (std::size_t i = 0; i < kNumVariables; ++i) report.classification.variables[i] = prf1(p[i], y[i]);
  report.classification.posts = pred.size();
  detail::finish_field(report.generation.group);
  detail::finish_field(report.generation.statement);
  return report;
}

namespace detail {

inline std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  return buf;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

inline std::string column_name(Variable v) {
  switch (v) {
    case Variable::kOffensive: return "offensive";
    case Variable::kIntent: return "intent";
    case Variable::kLewd: return "lewd";
    case Variable::kGroup: return "group targeted";
    case Variable::kIngroup: return "in-group";
  }
  return "";
}

}  // namespace detail

// Classification table (percent), then generation table. Variables the
// model never predicted positive are shown as "--".
inline void render(std::ostream& out, const EvalReport& r, const std::string& split = "dev.") {
  using detail::pad;
  using detail::pct;
  const std::array<Variable, kNumVariables> order = {Variable::kOffensive, Variable::kIntent,
                                                     Variable::kLewd, Variable::kGroup,
                                                     Variable::kIngroup};
  out << "classification (" << r.classification.posts << " posts)\n";
  out << pad("", 4);
  for (Variable v : order) out << pad(detail::column_name(v), 21);
  out << "\n" << pad("", 4);
  for (Variable v : order) out << pad(pct(r.classification[v].gold_positive_rate) + "% pos. (" + split + ")", 21);
  out << "\n" << pad("", 4);
  for (std::size_t i = 0; i < order.size(); ++i) out << pad("P", 7) << pad("R", 7) << pad("F1", 7);
  out << "\n" << pad("", 4);
  for (Variable v : order) {
    const auto& s = r.classification[v];
    if (s.precision_undefined) {
      out << pad("--", 7) << pad("--", 7) << pad("--", 7);
    } else {
      out << pad(pct(s.precision), 7) << pad(pct(s.recall), 7) << pad(pct(s.f1), 7);
    }
  }
  out << "\n\ngeneration\n";
  out << pad("", 14) << pad("BLEU", 8) << pad("Rouge-L", 9) << pad("WMD", 8) << pad("n", 7) << "\n";
  auto row = [&](const char* name, const FieldScores& f) {
    char wmd[32] = "n/a";
    if (f.wmd) std::snprintf(wmd, sizeof wmd, "%.2f", *f.wmd);
    out << pad(name, 14) << pad(pct(f.bleu2), 8) << pad(pct(f.rougeL_f1), 9) << pad(wmd, 8)
        << pad(std::to_string(f.scored), 7) << "\n";
  };
  row("group", r.generation.group);
  row("statement", r.generation.statement);
  out << "\nconventions: " << kEvalConventions << "\n";
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json cls = nlohmann::json::object();
  for (Variable v : kAllVariables) {
    const auto& s = r.classification[v];
    nlohmann::json entry = {{"gold_positive_rate", s.gold_positive_rate},
                            {"precision_undefined", s.precision_undefined},
                            {"recall_undefined", s.recall_undefined}};
    if (s.precision_undefined) {
      entry["precision"] = nullptr;
      entry["recall"] = nullptr;
      entry["f1"] = nullptr;
    } else {
      entry["precision"] = s.precision;
      entry["recall"] = s.recall;
      entry["f1"] = s.f1;
    }
    cls[std::string(to_string(v))] = std::move(entry);
  }
  auto field = [](const FieldScores& f) {
    return nlohmann::json{{"bleu2", f.bleu2},
                          {"rougeL_f1", f.rougeL_f1},
                          {"wmd", f.wmd ? nlohmann::json(*f.wmd) : nlohmann::json(nullptr)},
                          {"scored", f.scored},
                          {"wmd_scored", f.wmd_scored},
                          {"wmd_skipped", f.wmd_skipped},
                          {"oov_tokens", f.oov_tokens}};
  };
  return {{"posts", r.classification.posts},
          {"classification", std::move(cls)},
          {"generation",
           {{"group", field(r.generation.group)}, {"statement", field(r.generation.statement)}}},
          {"conventions", std::string(kEvalConventions)}};
}

}  // namespace sbf

#endif  // SBF_EVAL_HPP
