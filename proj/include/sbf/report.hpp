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

// Text and JSON renderings of corpus statistics and agreement.

#ifndef SBF_REPORT_HPP
#define SBF_REPORT_HPP

#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"
#include "sbf/corpus.hpp"

namespace sbf {

namespace detail {

inline std::string fixed(double x, int digits = 1) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string row(const std::string& name, const std::string& value, std::size_t width = 34) {
  std::string s = name;
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s + value + "\n";
}

inline nlohmann::json per_variable(const std::array<double, kNumVariables>& a) {
  nlohmann::json j = nlohmann::json::object();
  for (Variable v : kAllVariables) j[std::string(to_string(v))] = a[static_cast<std::size_t>(v)];
  return j;
}

}  // namespace detail

inline void render(std::ostream& out, const CorpusStats& s) {
  using detail::row;
  out << row("total # tuples", std::to_string(s.total_tuples));
  out << row("# unique posts", std::to_string(s.unique_posts));
  out << row("# unique groups", std::to_string(s.unique_groups));
  out << row("# unique implications", std::to_string(s.unique_implications));
  out << row("# unique post-group", std::to_string(s.unique_post_group));
  out << row("# unique post-group-implication", std::to_string(s.unique_post_group_implication));
  out << row("# unique group-implication", std::to_string(s.unique_group_implication));
  out << row("# annotations", std::to_string(s.annotations));
  out << "\nskews (% pos.)        per annotation   per tuple   per post (consensus)\n";
  for (Variable v : {Variable::kOffensive, Variable::kIntent, Variable::kLewd, Variable::kGroup,
                     Variable::kIngroup}) {
    const auto i = static_cast<std::size_t>(v);
    std::string name(to_string(v));
    name.resize(22, ' ');
    std::string a = detail::fixed(s.skew_per_annotation[i]);
    std::string b = detail::fixed(s.skew_per_tuple[i]);
    a.resize(17, ' ');
    b.resize(12, ' ');
    out << name << a << b << detail::fixed(s.skew_per_post_consensus[i]) << "\n";
  }
  out << "\nconvention: " << kTupleConvention << "\n";
}

inline nlohmann::json to_json(const CorpusStats& s) {
  return {{"total_tuples", s.total_tuples},
          {"unique_posts", s.unique_posts},
          {"unique_groups", s.unique_groups},
          {"unique_implications", s.unique_implications},
          {"unique_post_group", s.unique_post_group},
          {"unique_post_group_implication", s.unique_post_group_implication},
          {"unique_group_implication", s.unique_group_implication},
          {"annotations", s.annotations},
          {"skew_per_annotation", detail::per_variable(s.skew_per_annotation)},
          {"skew_per_tuple", detail::per_variable(s.skew_per_tuple)},
          {"skew_per_post_consensus", detail::per_variable(s.skew_per_post_consensus)},
          {"tuple_convention", std::string(kTupleConvention)}};
}

inline constexpr std::string_view kAgreementConvention =
    "pairwise: agreeing annotator pairs / all pairs per post, macro-averaged over posts with >= 2 "
    "annotations (micro pools all pairs); alpha: Krippendorff, nominal, on binarized labels; "
    "missing hierarchical answers count as negative";

inline void render(std::ostream& out, const AgreementReport& r) {
  out << "variable       pairwise(macro)  pairwise(micro)  alpha    posts\n";
  for (Variable v : kAllVariables) {
    const auto& a = r[v];
    std::string name(to_string(v));
    name.resize(15, ' ');
    std::string p = detail::fixed(100 * a.pairwise) + "%";
    std::string m = detail::fixed(100 * a.pairwise_micro) + "%";
    std::string al = a.alpha ? detail::fixed(*a.alpha, 3) : std::string("undef");
    p.resize(17, ' ');
    m.resize(17, ' ');
    al.resize(9, ' ');
    out << name << p << m << al << a.posts << "\n";
  }
  out << "exact group match: " << detail::fixed(100 * r.exact_group) << "% over "
      << r.exact_group_posts << " posts\n";
  out << "\nconvention: " << kAgreementConvention << "\n";
}

inline nlohmann::json to_json(const AgreementReport& r) {
  nlohmann::json vars = nlohmann::json::object();
  for (Variable v : kAllVariables) {
    const auto& a = r[v];
    vars[std::string(to_string(v))] = {
        {"pairwise", a.pairwise},
        {"pairwise_micro", a.pairwise_micro},
        {"alpha", a.alpha ? nlohmann::json(*a.alpha) : nlohmann::json(nullptr)},
        {"posts", a.posts}};
  }
  return {{"variables", std::move(vars)},
          {"exact_group", r.exact_group},
          {"exact_group_posts", r.exact_group_posts},
          {"convention", std::string(kAgreementConvention)}};
}

}  // namespace sbf

#endif  // SBF_REPORT_HPP
