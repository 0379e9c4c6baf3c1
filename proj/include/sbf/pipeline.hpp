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

// End-to-end steps shared by the command line and the tests: corpus to
// training instances, held-out loss, batch decoding.

#ifndef SBF_PIPELINE_HPP
#define SBF_PIPELINE_HPP

#include <cmath>
#include <fstream>
#include <ostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbf/corpus.hpp"
#include "sbf/decoder.hpp"
#include "sbf/frame_json.hpp"
#include "sbf/linearizer.hpp"
#include "sbf/ngram.hpp"
#include "sbf/seqmodel.hpp"

namespace sbf {

struct LoadOptions {
  std::optional<InputFormat> format;  // from the extension when unset
  std::optional<std::string> map_path;
  bool lenient = false;
};

inline Corpus load_corpus(const std::string& path, const LoadOptions& opts = {}) {
  IngestOptions io;
  io.format = opts.format.value_or(format_for_path(path));
  io.columns = opts.map_path ? ColumnMap::load(*opts.map_path) : ColumnMap::identity();
  io.lenient = opts.lenient;
  return ingest(path, io);
}

// One frame record per annotation, with the post text and source, in the
// form ingest() reads back as jsonl.
inline void write_jsonl(std::ostream& out, const Corpus& c) {
  for (const auto& a : c.annotations) {
    nlohmann::json j = to_json(a);
    if (const auto it = c.posts.find(a.post_id); it != c.posts.end()) {
      j["post"] = it->second.text;
      j["source"] = std::string(to_string(it->second.source));
    }
    out << j.dump() << "\n";
  }
}

// Training instances: every annotation expanded to one frame per
// (group, statement) pair, each with its loss mask.
struct Instance {
  LinearFrame frame;
  LossMask mask;
};

inline std::vector<Instance> instances(const Corpus& c, const LinearizeOptions& opts = {}) {
  std::vector<Instance> out;
  for (const auto& a : c.annotations) {
    const auto it = c.posts.find(a.post_id);
    if (it == c.posts.end()) throw InvalidArgument("annotation for unknown post '" + a.post_id + "'");
    for (const auto& f : expand_instances(it->second.text, a)) {
      LinearFrame lf = linearize(f, opts);
      LossMask m = make_loss_mask(lf, f);
      out.push_back({std::move(lf), std::move(m)});
    }
  }
  return out;
}

inline std::vector<LinearFrame> frames_of(const std::vector<Instance>& xs) {
  std::vector<LinearFrame> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.frame);
  return out;
}

// Mean over instances of the masked per-instance loss.
inline double mean_loss(const SequenceModel& model, const std::vector<Instance>& xs) {
  if (xs.empty()) throw InvalidArgument("mean_loss: no instances");
  double total = 0.0;
  for (const auto& x : xs) total += sequence_loss(model, x.frame, x.mask);
  return total / static_cast<double>(xs.size());
}

inline double uniform_loss(const Vocab& v) { return std::log(static_cast<double>(v.size())); }

struct PostInput {
  std::string id;
  std::string text;
};

// Posts to decode: JSONL records with post_id and text (or post), first
// occurrence of an id wins; any other extension is one post per line with
// ids line-1, line-2, ...
inline std::vector<PostInput> read_posts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::vector<PostInput> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  const bool jsonl = path.size() > 6 && path.substr(path.size() - 6) == ".jsonl";
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!jsonl) {
      out.push_back({"line-" + std::to_string(lineno), line});
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string id = j.at("post_id").get<std::string>();
      const std::string text = j.contains("text") ? j["text"].get<std::string>()
                                                  : j.at("post").get<std::string>();
      if (seen.insert(id).second) out.push_back({id, text});
    } catch (const nlohmann::json::exception& e) {
      throw IoError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError("no posts in '" + path + "'");
  return out;
}

inline std::vector<PostInput> posts_of(const Corpus& c) {
  std::vector<PostInput> out;
  for (const auto& [id, p] : c.posts) out.push_back({id, p.text});
  return out;
}

struct DecodeFailure {
  std::string post_id;
  std::string reason;
};

// Decodes every post. Posts the model cannot decode (all tokens unknown)
// get an empty frame, every variable unparsed, and are listed in failures.
inline std::vector<std::pair<std::string, DecodedFrame>> decode_all(
    const SequenceModel& model, const std::vector<PostInput>& posts, const DecodeConfig& cfg,
    std::vector<DecodeFailure>* failures = nullptr) {
  std::vector<std::pair<std::string, DecodedFrame>> out;
  out.reserve(posts.size());
  for (const auto& p : posts) {
    try {
      out.emplace_back(p.id, decode(model, model_tokens(p.text), cfg));
    } catch (const InvalidArgument& e) {
      DecodedFrame d;
      d.fields.post = model_tokens(p.text);
      d.notes.push_back(e.what());
      out.emplace_back(p.id, std::move(d));
      if (failures) failures->push_back({p.id, e.what()});
    }
  }
  return out;
}

}  // namespace sbf

#endif  // SBF_PIPELINE_HPP
