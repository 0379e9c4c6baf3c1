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

// Corpus ingestion, dataset statistics, inter-annotator agreement and
// post-level train/dev/test splits.

#ifndef SBF_CORPUS_HPP
#define SBF_CORPUS_HPP

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sbf/error.hpp"
#include "sbf/frame.hpp"
#include "sbf/frame_json.hpp"
#include "sbf/text.hpp"

namespace sbf {

enum class InputFormat { kTsv, kCsv, kJsonl };

inline InputFormat parse_format(std::string_view s) {
  if (s == "tsv") return InputFormat::kTsv;
  if (s == "csv") return InputFormat::kCsv;
  if (s == "jsonl") return InputFormat::kJsonl;
  throw InvalidArgument("unknown input format '" + std::string(s) + "' (expected tsv|csv|jsonl)");
}

// Guesses the format from a file extension; defaults to tsv.
inline InputFormat format_for_path(const std::string& path) {
  auto ends_with = [&](std::string_view suf) {
    return path.size() >= suf.size() && path.compare(path.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with(".jsonl") || ends_with(".json")) return InputFormat::kJsonl;
  if (ends_with(".csv")) return InputFormat::kCsv;
  return InputFormat::kTsv;
}

// Maps schema fields to external column headers, plus optional value
// rewrites. File syntax, one entry per line, '#' starts a comment:
//
//   post_id=HITId
//   offensive=offensiveYN
//   value.offensive.1.0=yes
//
// Schema fields: post_id, worker_id, post, source, offensive, intent, lewd,
// group, target_group, target_statement, ingroup.
class ColumnMap {
 public:
  static constexpr std::array<std::string_view, 11> kFields = {
      "post_id", "worker_id", "post",  "source",           "offensive", "intent",
      "lewd",    "group",     "target_group", "target_statement", "ingroup"};
  static constexpr std::array<std::string_view, 6> kRequired = {
      "post_id", "worker_id", "post", "offensive", "intent", "lewd"};

  // Schema field names used as headers.
  static ColumnMap identity() {
    ColumnMap m;
    for (auto f : kFields) m.columns_[std::string(f)] = std::string(f);
    return m;
  }

  static ColumnMap parse(std::istream& in) {
    ColumnMap m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw InvalidArgument("column map line " + std::to_string(lineno) + ": expected key=value");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.rfind("value.", 0) == 0) {
        const std::string rest = key.substr(6);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) {
          throw InvalidArgument("column map line " + std::to_string(lineno) +
                                ": expected value.<field>.<external>=<label>");
        }
        m.values_[{rest.substr(0, dot), rest.substr(dot + 1)}] = value;
        continue;
      }
      if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
        throw InvalidArgument("column map line " + std::to_string(lineno) + ": unknown field '" +
                              key + "'");
      }
      m.columns_[key] = value;
    }
    return m;
  }

  static ColumnMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read column map '" + path + "'");
    return parse(in);
  }

  std::optional<std::string> column(std::string_view field) const {
    const auto it = columns_.find(std::string(field));
    if (it == columns_.end()) return std::nullopt;
    return it->second;
  }

  void set(std::string field, std::string column) { columns_[std::move(field)] = std::move(column); }

  // Rewrites an external value for `field`; unmapped values pass through.
  std::string map_value(const std::string& field, const std::string& raw) const {
    const auto it = values_.find({field, raw});
    return it == values_.end() ? raw : it->second;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> columns_;
  std::map<std::pair<std::string, std::string>, std::string> values_;
};

struct Reject {
  std::size_t record = 0;  // 1-based data record number (TSV/CSV: excluding header)
  std::string reason;
};

struct Corpus {
  std::map<std::string, Post> posts;
  std::vector<FrameAnnotation> annotations;
  std::map<Source, std::size_t> provenance;  // posts per source
  std::vector<Reject> rejects;

  // Annotations grouped by post id, in annotation order.
  std::map<std::string, std::vector<const FrameAnnotation*>> by_post() const {
    std::map<std::string, std::vector<const FrameAnnotation*>> out;
    for (const auto& a : annotations) out[a.post_id].push_back(&a);
    return out;
  }
};

struct IngestOptions {
  InputFormat format = InputFormat::kTsv;
  ColumnMap columns = ColumnMap::identity();
  // Keep rows that are well-formed but violate the annotation hierarchy.
  bool lenient = false;
};

namespace detail {

inline std::vector<std::string> split_tsv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// newlines. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Numeric answer codes used by the released annotation files.
inline std::optional<std::string> numeric_label(Variable var, const std::string& raw) {
  char* end = nullptr;
  const double x = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') return std::nullopt;
  auto near = [&](double y) { return std::abs(x - y) < 0.02; };
  switch (var) {
    case Variable::kIntent:
      if (near(1.0)) return "yes";
      if (near(0.66) || near(2.0 / 3.0)) return "probably";
      if (near(0.33) || near(1.0 / 3.0)) return "probably-not";
      if (near(0.0)) return "no";
      return std::nullopt;
    case Variable::kGroup:
      if (near(1.0)) return "yes";
      if (near(0.0)) return "no";
      return std::nullopt;
    default:
      if (near(1.0)) return "yes";
      if (near(0.5)) return "maybe";
      if (near(0.0)) return "no";
      return std::nullopt;
  }
}

struct RowKey {
  std::string post_id;
  std::string worker_id;
  auto operator<=>(const RowKey&) const = default;
};

struct PendingAnnotation {
  FrameAnnotation annotation;
  std::size_t first_record = 0;
};

// Folds flat rows (one per annotation x target x statement) into
// annotations, then validates each one.
class RowAssembler {
 public:
  RowAssembler(const IngestOptions& opts, Corpus& corpus) : opts_(opts), corpus_(corpus) {}

  void add_row(std::size_t record, const std::map<std::string, std::string>& row) {
    auto get = [&](std::string_view field) -> std::string {
      const auto it = row.find(std::string(field));
      if (it == row.end()) return {};
      return opts_.columns.map_value(std::string(field), trim_ws(it->second));
    };
    try {
      const std::string post_id = get("post_id");
      const std::string worker_id = get("worker_id");
      if (post_id.empty()) throw ValidationError("empty post_id");
      if (worker_id.empty()) throw ValidationError("empty worker_id");
      const std::string text = get("post");

      FrameAnnotation a;
      a.post_id = post_id;
      a.worker_id = worker_id;
      a.offensive = label(Variable::kOffensive, get("offensive")).value();
      a.intent = label(Variable::kIntent, get("intent")).value();
      a.lewd = label(Variable::kLewd, get("lewd")).value();
      a.group = label(Variable::kGroup, get("group"));
      a.ingroup = label(Variable::kIngroup, get("ingroup"));
      const std::string group_name = normalize_phrase(get("target_group"));
      const std::string statement = get("target_statement");
      if (!group_name.empty()) {
        TargetPair t(group_name, {});
        if (!normalize_phrase(statement).empty()) t.statements.push_back(statement);
        a.targets.push_back(std::move(t));
      } else if (!normalize_phrase(statement).empty()) {
        throw ValidationError("target_statement without target_group");
      }

      register_post(post_id, text, get("source"));
      merge(record, std::move(a));
    } catch (const std::bad_optional_access&) {
      corpus_.rejects.push_back({record, "missing required categorical answer"});
    } catch (const Error& e) {
      corpus_.rejects.push_back({record, e.what()});
    }
  }

  void add_annotation(std::size_t record, FrameAnnotation a, const std::string& text,
                      const std::string& source) {
    try {
      register_post(a.post_id, text, source);
      merge(record, std::move(a));
    } catch (const Error& e) {
      corpus_.rejects.push_back({record, e.what()});
    }
  }

  void finish() {
    for (auto& key : order_) {
      auto& p = pending_.at(key);
      const auto v = validate(p.annotation);
      if (!v.ok() && !opts_.lenient) {
        std::string reason = "hierarchy violation:";
        for (const auto& x : v.violations) reason += " " + x.field + ": " + x.rule + ";";
        corpus_.rejects.push_back({p.first_record, reason});
        continue;
      }
      corpus_.annotations.push_back(std::move(p.annotation));
    }
    std::stable_sort(corpus_.rejects.begin(), corpus_.rejects.end(),
                     [](const Reject& a, const Reject& b) { return a.record < b.record; });
    // Posts that only appear in rejected rows are dropped from the registry.
    std::set<std::string> used;
    for (const auto& a : corpus_.annotations) used.insert(a.post_id);
    for (auto it = corpus_.posts.begin(); it != corpus_.posts.end();) {
      it = used.count(it->first) ? std::next(it) : corpus_.posts.erase(it);
    }
    corpus_.provenance.clear();
    for (const auto& [id, p] : corpus_.posts) ++corpus_.provenance[p.source];
  }

 private:
  std::optional<Label> label(Variable var, const std::string& raw) const {
    if (raw.empty()) return std::nullopt;
    if (auto l = parse_label(normalize_phrase(raw))) {
      if (!is_legal(var, *l)) {
        throw ValidationError("illegal label '" + raw + "' for variable " +
                              std::string(to_string(var)));
      }
      return l;
    }
    if (auto code = numeric_label(var, raw)) return parse_label(*code);
    throw ValidationError("illegal label '" + raw + "' for variable " + std::string(to_string(var)));
  }

  void register_post(const std::string& id, const std::string& text, const std::string& source) {
    auto it = corpus_.posts.find(id);
    if (it != corpus_.posts.end()) return;
    if (normalize_phrase(text).empty()) throw ValidationError("post '" + id + "' has empty text");
    corpus_.posts.emplace(id, Post{id, escape_control_tokens(text), parse_source(source)});
  }

  void merge(std::size_t record, FrameAnnotation a) {
    RowKey key{a.post_id, a.worker_id};
    auto it = pending_.find(key);
    if (it == pending_.end()) {
      order_.push_back(key);
      pending_.emplace(key, PendingAnnotation{std::move(a), record});
      return;
    }
    auto& cur = it->second.annotation;
    if (cur.offensive != a.offensive || cur.intent != a.intent || cur.lewd != a.lewd ||
        cur.group != a.group || cur.ingroup != a.ingroup) {
      throw ValidationError("rows for worker '" + a.worker_id + "' on post '" + a.post_id +
                            "' disagree on categorical answers");
    }
    for (auto& t : a.targets) {
      auto same = std::find_if(cur.targets.begin(), cur.targets.end(),
                               [&](const TargetPair& x) { return x.group_name == t.group_name; });
      if (same == cur.targets.end()) {
        cur.targets.push_back(std::move(t));
        continue;
      }
      for (auto& s : t.statements) {
        if (std::find(same->statements.begin(), same->statements.end(), s) ==
            same->statements.end()) {
          same->statements.push_back(std::move(s));
        }
      }
    }
  }

  const IngestOptions& opts_;
  Corpus& corpus_;
  std::map<RowKey, PendingAnnotation> pending_;
  std::vector<RowKey> order_;
};

}  // namespace detail

// Reads an annotation file. Invalid records are collected in
// Corpus::rejects with a reason; they are never dropped silently.
inline Corpus ingest(std::istream& in, const IngestOptions& opts) {
  Corpus corpus;
  detail::RowAssembler assembler(opts, corpus);
  std::size_t records = 0;

  if (opts.format == InputFormat::kJsonl) {
    std::string line;
    while (std::getline(in, line)) {
      if (detail::trim_ws(line).empty()) continue;
      ++records;
      try {
        const json j = json::parse(line);
        FrameAnnotation a = annotation_from_json(j);
        const std::string text = j.value("post", std::string());
        const std::string source = j.value("source", std::string());
        assembler.add_annotation(records, std::move(a), text, source);
      } catch (const json::exception& e) {
        corpus.rejects.push_back({records, std::string("malformed JSON: ") + e.what()});
      } catch (const Error& e) {
        corpus.rejects.push_back({records, e.what()});
      }
    }
  } else {
    std::vector<std::string> header;
    auto next_record = [&](std::vector<std::string>& fields) -> bool {
      if (opts.format == InputFormat::kCsv) return detail::read_csv_record(in, fields);
      std::string line;
      if (!std::getline(in, line)) return false;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      fields = detail::split_tsv_line(line);
      return true;
    };
    while (next_record(header)) {
      if (!(header.size() == 1 && detail::trim_ws(header[0]).empty())) break;
      header.clear();
    }
    if (header.empty()) throw IoError("no records");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index[detail::trim_ws(header[i])] = i;
    std::map<std::string, std::size_t> field_index;
    for (auto field : ColumnMap::kFields) {
      const auto col = opts.columns.column(field);
      if (!col) continue;
      const auto it = index.find(*col);
      if (it != index.end()) field_index[std::string(field)] = it->second;
    }
    for (auto req : ColumnMap::kRequired) {
      if (!field_index.count(std::string(req))) {
        const auto col = opts.columns.column(req);
        throw InvalidArgument("unmapped required column: " + std::string(req) +
                              (col ? " (header '" + *col + "' not found)" : ""));
      }
    }
    std::vector<std::string> fields;
    while (next_record(fields)) {
      if (fields.size() == 1 && detail::trim_ws(fields[0]).empty()) continue;
      ++records;
      if (fields.size() != header.size()) {
        corpus.rejects.push_back({records, "expected " + std::to_string(header.size()) +
                                               " columns, found " + std::to_string(fields.size())});
        continue;
      }
      std::map<std::string, std::string> row;
      for (const auto& [field, i] : field_index) row[field] = fields[i];
      assembler.add_row(records, row);
    }
  }
  if (records == 0) throw IoError("no records");
  assembler.finish();
  return corpus;
}

inline Corpus ingest(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  return ingest(in, opts);
}

// Builds a corpus directly from in-memory records (used by the service and
// tests). Records failing validate() are rejected.
inline Corpus make_corpus(const std::vector<Post>& posts,
                          const std::vector<FrameAnnotation>& annotations) {
  Corpus c;
  for (const auto& p : posts) c.posts.emplace(p.id, p);
  std::size_t n = 0;
  for (const auto& a : annotations) {
    ++n;
    if (!c.posts.count(a.post_id)) {
      c.rejects.push_back({n, "unknown post '" + a.post_id + "'"});
      continue;
    }
    if (!validate(a).ok()) {
      c.rejects.push_back({n, "hierarchy violation"});
      continue;
    }
    c.annotations.push_back(a);
  }
  for (const auto& [id, p] : c.posts) ++c.provenance[p.source];
  return c;
}

// --- statistics -----------------------------------------------------------

struct CorpusStats {
  std::uint64_t total_tuples = 0;
  std::uint64_t unique_posts = 0;
  std::uint64_t unique_groups = 0;
  std::uint64_t unique_implications = 0;
  std::uint64_t unique_post_group = 0;
  std::uint64_t unique_post_group_implication = 0;
  std::uint64_t unique_group_implication = 0;
  std::uint64_t annotations = 0;
  // Percent positive, indexed by Variable, under three denominators.
  std::array<double, kNumVariables> skew_per_annotation{};
  std::array<double, kNumVariables> skew_per_tuple{};
  std::array<double, kNumVariables> skew_per_post_consensus{};
};

// Tuple expansion of one annotation: sum over its target groups of
// max(#statements, 1); an annotation without targets is one tuple.
inline std::uint64_t tuple_count(const FrameAnnotation& a) {
  if (a.targets.empty()) return 1;
  std::uint64_t n = 0;
  for (const auto& t : a.targets) n += std::max<std::uint64_t>(t.statements.size(), 1);
  return n;
}

inline constexpr std::string_view kTupleConvention =
    "tuples = sum over annotations of sum_g max(|statements_g|, 1), 1 for annotations without "
    "targets; uniques on lowercased, trimmed, whitespace-collapsed strings";

inline CorpusStats stats(const Corpus& corpus) {
  CorpusStats s;
  std::set<std::string> posts, groups, implications;
  std::set<std::pair<std::string, std::string>> post_group, group_impl;
  std::set<std::tuple<std::string, std::string, std::string>> post_group_impl;
  std::array<std::uint64_t, kNumVariables> pos_ann{}, pos_tuple{};
  for (const auto& a : corpus.annotations) {
    ++s.annotations;
    posts.insert(a.post_id);
    const auto tuples = tuple_count(a);
    s.total_tuples += tuples;
    for (Variable v : kAllVariables) {
      const auto i = static_cast<std::size_t>(v);
      pos_ann[i] += a.bit(v);
      pos_tuple[i] += a.bit(v) * tuples;
    }
    for (const auto& t : a.targets) {
      const std::string g = normalize_phrase(t.group_name);
      groups.insert(g);
      post_group.emplace(a.post_id, g);
      for (const auto& st : t.statements) {
        const std::string n = normalize_phrase(st);
        implications.insert(n);
        group_impl.emplace(g, n);
        post_group_impl.emplace(a.post_id, g, n);
      }
    }
  }
  s.unique_posts = posts.size();
  s.unique_groups = groups.size();
  s.unique_implications = implications.size();
  s.unique_post_group = post_group.size();
  s.unique_post_group_implication = post_group_impl.size();
  s.unique_group_implication = group_impl.size();

  std::array<std::uint64_t, kNumVariables> pos_post{};
  const auto grouped = corpus.by_post();
  for (const auto& [id, anns] : grouped) {
    std::vector<FrameAnnotation> copy;
    copy.reserve(anns.size());
    for (const auto* a : anns) copy.push_back(*a);
    const auto agg = aggregate(copy);
    for (std::size_t i = 0; i < kNumVariables; ++i) pos_post[i] += agg.labels[i];
  }
  for (std::size_t i = 0; i < kNumVariables; ++i) {
    auto pct = [](std::uint64_t num, std::uint64_t den) {
      return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    s.skew_per_annotation[i] = pct(pos_ann[i], s.annotations);
    s.skew_per_tuple[i] = pct(pos_tuple[i], s.total_tuples);
    s.skew_per_post_consensus[i] = pct(pos_post[i], grouped.size());
  }
  return s;
}

// --- agreement ------------------------------------------------------------

struct VariableAgreement {
  double pairwise = 0.0;        // macro-averaged over posts
  double pairwise_micro = 0.0;  // pooled over all annotator pairs
  std::optional<double> alpha;  // nullopt when expected disagreement is zero
  std::size_t posts = 0;        // posts with at least two annotations
};

struct AgreementReport {
  std::array<VariableAgreement, kNumVariables> variables{};
  double exact_group = 0.0;  // macro over posts with >= 1 pair that both named groups
  std::size_t exact_group_posts = 0;

  const VariableAgreement& operator[](Variable v) const {
    return variables[static_cast<std::size_t>(v)];
  }
};

// Krippendorff's alpha, nominal metric, for units of binary values. Units
// with fewer than two values are not pairable and are skipped.
inline std::optional<double> krippendorff_alpha_binary(const std::vector<std::vector<int>>& units) {
  double n = 0, n1 = 0, observed = 0;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    const double m = static_cast<double>(u.size());
    double ones = 0;
    for (int x : u) ones += x ? 1 : 0;
    const double zeros = m - ones;
    n += m;
    n1 += ones;
    // Ordered pairs with differing values, weighted by 1/(m-1).
    observed += 2.0 * ones * zeros / (m - 1.0);
  }
  if (n < 2) return std::nullopt;
  const double n0 = n - n1;
  const double expected = 2.0 * n0 * n1 / (n * (n - 1.0));
  if (expected == 0.0) return std::nullopt;
  return 1.0 - (observed / n) / expected;
}

inline AgreementReport agreement(const Corpus& corpus) {
  AgreementReport r;
  const auto grouped = corpus.by_post();
  for (Variable v : kAllVariables) {
    const auto vi = static_cast<std::size_t>(v);
    std::vector<std::vector<int>> units;
    double macro_sum = 0, agree_pairs = 0, total_pairs = 0;
    std::size_t posts = 0;
    for (const auto& [id, anns] : grouped) {
      std::vector<int> bits;
      for (const auto* a : anns) bits.push_back(a->bit(v));
      units.push_back(bits);
      if (bits.size() < 2) continue;
      double agree = 0, pairs = 0;
      for (std::size_t i = 0; i < bits.size(); ++i) {
        for (std::size_t j = i + 1; j < bits.size(); ++j) {
          pairs += 1;
          agree += bits[i] == bits[j] ? 1 : 0;
        }
      }
      macro_sum += agree / pairs;
      agree_pairs += agree;
      total_pairs += pairs;
      ++posts;
    }
    auto& out = r.variables[vi];
    out.posts = posts;
    out.pairwise = posts ? macro_sum / static_cast<double>(posts) : 0.0;
    out.pairwise_micro = total_pairs > 0 ? agree_pairs / total_pairs : 0.0;
    out.alpha = krippendorff_alpha_binary(units);
  }

  double group_sum = 0;
  for (const auto& [id, anns] : grouped) {
    double agree = 0, pairs = 0;
    for (std::size_t i = 0; i < anns.size(); ++i) {
      for (std::size_t j = i + 1; j < anns.size(); ++j) {
        if (anns[i]->targets.empty() || anns[j]->targets.empty()) continue;
        std::set<std::string> gi, gj;
        for (const auto& t : anns[i]->targets) gi.insert(normalize_phrase(t.group_name));
        for (const auto& t : anns[j]->targets) gj.insert(normalize_phrase(t.group_name));
        pairs += 1;
        agree += gi == gj ? 1 : 0;
      }
    }
    if (pairs > 0) {
      group_sum += agree / pairs;
      ++r.exact_group_posts;
    }
  }
  r.exact_group = r.exact_group_posts ? group_sum / static_cast<double>(r.exact_group_posts) : 0.0;
  return r;
}

// --- splits ---------------------------------------------------------------

enum class Split { kTrain, kDev, kTest };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

struct SplitRatios {
  double train = 0.75;
  double dev = 0.125;
  double test = 0.125;
};

struct SplitAssignment {
  std::map<std::string, Split> assignment;
  std::uint64_t seed = 0;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& [id, x] : assignment) n += x == s ? 1 : 0;
    return n;
  }

  // "post_id<TAB>split" lines sorted by post id, after a seed header.
  void write(std::ostream& out) const {
    out << "# seed=" << seed << "\n";
    for (const auto& [id, s] : assignment) out << id << '\t' << to_string(s) << '\n';
  }

  static SplitAssignment read(std::istream& in) {
    SplitAssignment a;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.rfind("# seed=", 0) == 0) {
        a.seed = std::stoull(line.substr(7));
        continue;
      }
      if (line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw IoError("split file: expected post_id<TAB>split");
      const std::string name = line.substr(tab + 1);
      Split s;
      if (name == "train") s = Split::kTrain;
      else if (name == "dev") s = Split::kDev;
      else if (name == "test") s = Split::kTest;
      else throw IoError("split file: unknown split '" + name + "'");
      a.assignment[line.substr(0, tab)] = s;
    }
    return a;
  }
};

// Assigns whole posts to splits. Post ids are sorted, shuffled with a
// seeded Fisher-Yates over mt19937_64 (whose output sequence is fixed by
// the standard), and cut by largest-remainder rounding of the ratios.
inline SplitAssignment split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed) {
  const double sum = ratios.train + ratios.dev + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.dev < 0 || ratios.test < 0) {
    throw InvalidArgument("split ratios must be non-negative and sum to 1");
  }
  std::set<std::string> ids;
  for (const auto& a : corpus.annotations) ids.insert(a.post_id);
  for (const auto& [id, p] : corpus.posts) ids.insert(id);
  std::vector<std::string> order(ids.begin(), ids.end());

  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    // Rejection sampling keeps the draw unbiased and platform independent.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = rng(); while (x >= limit);
    std::swap(order[i - 1], order[x % bound]);
  }

  const std::size_t n = order.size();
  const std::array<double, 3> r = {ratios.train, ratios.dev, ratios.test};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = r[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[best] + 1e-12) best = i;
    }
    ++sizes[best];
    frac[best] = -1.0;
    ++assigned;
  }

  SplitAssignment out;
  out.seed = seed;
  std::size_t k = 0;
  const std::array<Split, 3> names = {Split::kTrain, Split::kDev, Split::kTest};
  for (int i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < sizes[i]; ++j) out.assignment[order[k++]] = names[i];
  }
  return out;
}

// Subset of the corpus whose posts fall in split `which`.
inline Corpus select_split(const Corpus& corpus, const SplitAssignment& a, Split which) {
  Corpus out;
  for (const auto& ann : corpus.annotations) {
    const auto it = a.assignment.find(ann.post_id);
    if (it != a.assignment.end() && it->second == which) out.annotations.push_back(ann);
  }
  for (const auto& ann : out.annotations) {
    if (const auto p = corpus.posts.find(ann.post_id); p != corpus.posts.end()) {
      out.posts.emplace(p->first, p->second);
    }
  }
  for (const auto& [id, p] : out.posts) ++out.provenance[p.source];
  return out;
}

// Consensus frames for every post, ordered by post id.
inline std::vector<AggregatedFrame> aggregate_corpus(const Corpus& corpus) {
  std::vector<AggregatedFrame> out;
  for (const auto& [id, anns] : corpus.by_post()) {
    std::vector<FrameAnnotation> copy;
    for (const auto* a : anns) copy.push_back(*a);
    out.push_back(aggregate(copy));
  }
  return out;
}

}  // namespace sbf

#endif  // SBF_CORPUS_HPP
