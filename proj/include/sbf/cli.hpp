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

// The sbf command line. Each subcommand is a thin adapter over the library:
//
//   ingest     normalize an annotation file to frame JSONL
//   validate   check every record against the annotation hierarchy
//   stats      corpus counts and label skews
//   agreement  inter-annotator agreement
//   split      post-level train/dev/test assignment
//   train      fit an n-gram model
//   decode     generate frames for posts
//   eval       score decoded frames against gold annotations
//   serve      run the annotation service
//
// Exit status: 0 ok, 1 runtime failure, 2 usage error. Failures print one
// JSON line {"error": {"code", "message"}} on stderr.

#ifndef SBF_CLI_HPP
#define SBF_CLI_HPP

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbf/corpus.hpp"
#include "sbf/decoder.hpp"
#include "sbf/eval.hpp"
#include "sbf/frame_json.hpp"
#include "sbf/ngram.hpp"
#include "sbf/pipeline.hpp"
#include "sbf/report.hpp"
#include "sbf/service.hpp"
#include "sbf/wmd.hpp"

namespace sbf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

// Input corpus flags shared by most subcommands.
struct CorpusFlags {
  std::string in;
  std::string format;
  std::string map;
  bool lenient = false;

  void add(CLI::App* app, bool with_lenient = false) {
    app->add_option("--in", in, "annotation file (tsv, csv or jsonl)")->required();
    app->add_option("--format", format, "input format; default from the extension")
        ->check(CLI::IsMember({"tsv", "csv", "jsonl"}));
    app->add_option("--map", map, "column map file");
    if (with_lenient) app->add_flag("--lenient", lenient, "keep rows that violate the hierarchy");
  }

  Corpus load() const {
    LoadOptions o;
    if (!format.empty()) o.format = parse_format(format);
    if (!map.empty()) o.map_path = map;
    o.lenient = lenient;
    return load_corpus(in, o);
  }
};

struct SplitFlags {
  std::string file;
  std::string name;

  void add(CLI::App* app, const std::string& default_name) {
    name = default_name;
    app->add_option("--split", file, "split assignment file from `sbf split`");
    app->add_option("--split-name", name, "which split to use")
        ->check(CLI::IsMember({"train", "dev", "test"}))
        ->capture_default_str();
  }

  std::optional<SplitAssignment> load() const {
    if (file.empty()) return std::nullopt;
    std::ifstream in(file);
    if (!in) throw IoError("cannot read split file '" + file + "'");
    return SplitAssignment::read(in);
  }

  Split which() const {
    if (name == "train") return Split::kTrain;
    if (name == "dev") return Split::kDev;
    return Split::kTest;
  }
};

inline void report_rejects(std::ostream& err, const Corpus& c, std::size_t limit = 20) {
  if (c.rejects.empty()) return;
  err << c.rejects.size() << " record(s) rejected\n";
  for (std::size_t i = 0; i < c.rejects.size() && i < limit; ++i) {
    err << "  record " << c.rejects[i].record << ": " << c.rejects[i].reason << "\n";
  }
}

class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw IoError("cannot write '" + path + "'");
    out_ = file_.get();
  }
  std::ostream& stream() { return *out_; }
  void close() {
    if (file_) {
      file_->close();
      if (!*file_) throw IoError("write failed");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

inline std::vector<double> parse_ratios(const std::string& s) {
  std::vector<double> r;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      r.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidArgument("bad ratio '" + part + "'");
    }
  }
  if (r.size() != 3) throw InvalidArgument("--ratios needs three comma-separated values");
  return r;
}

inline std::atomic<bool>& stop_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

inline void on_signal(int) { stop_flag().store(true); }

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Social Bias Frames toolkit", "sbf"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "normalize an annotation file to frame JSONL");
  detail::CorpusFlags ingest_in;
  std::string ingest_out, ingest_rejects;
  bool ingest_json = false;
  ingest_in.add(ingest_cmd, true);
  ingest_cmd->add_option("--out", ingest_out, "output JSONL file (default stdout)");
  ingest_cmd->add_option("--rejects", ingest_rejects, "write rejected records as JSONL");
  ingest_cmd->add_flag("--json", ingest_json, "summary as JSON on stderr");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check records against the hierarchy");
  detail::CorpusFlags validate_in;
  bool validate_json = false;
  validate_in.add(validate_cmd);
  validate_cmd->add_flag("--json", validate_json, "JSONL output, one line per record");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus counts and label skews");
  detail::CorpusFlags stats_in;
  bool stats_json = false;
  stats_in.add(stats_cmd);
  stats_cmd->add_flag("--json", stats_json, "JSON output");

  // agreement
  auto* agree_cmd = app.add_subcommand("agreement", "inter-annotator agreement");
  detail::CorpusFlags agree_in;
  bool agree_json = false;
  agree_in.add(agree_cmd);
  agree_cmd->add_flag("--json", agree_json, "JSON output");

  // split
  auto* split_cmd = app.add_subcommand("split", "post-level train/dev/test assignment");
  detail::CorpusFlags split_in;
  std::string split_ratios = "0.75,0.125,0.125", split_out;
  std::uint64_t split_seed = 0;
  bool split_json = false;
  split_in.add(split_cmd);
  split_cmd->add_option("--ratios", split_ratios, "train,dev,test")->capture_default_str();
  split_cmd->add_option("--seed", split_seed, "shuffle seed")->capture_default_str();
  split_cmd->add_option("--out", split_out, "assignment file (default stdout)");
  split_cmd->add_flag("--json", split_json, "summary as JSON on stderr");

  // train
  auto* train_cmd = app.add_subcommand("train", "fit an n-gram model");
  detail::CorpusFlags train_in;
  detail::SplitFlags train_split;
  NGramConfig train_cfg;
  std::string train_smoothing = "add-k", train_out;
  bool train_json = false;
  train_in.add(train_cmd);
  train_split.add(train_cmd, "train");
  train_cmd->add_option("--order", train_cfg.order, "n-gram order")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--smoothing", train_smoothing, "add-k or interpolated")
      ->check(CLI::IsMember({"add-k", "interpolated"}))
      ->capture_default_str();
  train_cmd->add_option("--k", train_cfg.k, "add-k constant")->capture_default_str();
  train_cmd->add_option("--weights", train_cfg.weights,
                        "interpolation weights: uniform, then orders 1..n");
  train_cmd->add_option("--out", train_out, "model file")->required();
  train_cmd->add_flag("--json", train_json, "JSON report");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "generate frames for posts");
  std::string decode_model, decode_in, decode_out, decode_mode = "greedy";
  detail::SplitFlags decode_split;
  DecodeConfig decode_cfg;
  std::size_t decode_max_length = 0;
  decode_cmd->add_option("--model", decode_model, "model file")->required();
  decode_cmd->add_option("--in", decode_in, "posts: JSONL with post_id and text/post, or text lines")
      ->required();
  decode_split.add(decode_cmd, "dev");
  decode_cmd->add_option("--mode", decode_mode, "greedy or sample")
      ->check(CLI::IsMember({"greedy", "sample"}))
      ->capture_default_str();
  decode_cmd->add_option("--candidates", decode_cfg.num_candidates, "samples per post")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  decode_cmd->add_option("--temperature", decode_cfg.temperature, "sampling temperature")
      ->capture_default_str();
  decode_cmd->add_flag("--constrained", decode_cfg.constrained, "enforce hierarchy consistency");
  decode_cmd->add_flag("--length-normalized", decode_cfg.length_normalized,
                       "rank samples by mean log-probability");
  decode_cmd->add_option("--max-length", decode_max_length, "sequence length cap");
  decode_cmd->add_option("--seed", decode_cfg.seed, "sampling seed")->capture_default_str();
  decode_cmd->add_option("--out", decode_out, "output JSONL (default stdout)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score decoded frames against gold");
  std::string eval_pred, eval_emb;
  detail::CorpusFlags eval_gold;
  detail::SplitFlags eval_split;
  bool eval_json = false;
  eval_cmd->add_option("--pred", eval_pred, "decoded frames JSONL")->required();
  eval_cmd->add_option("--gold", eval_gold.in, "gold annotation file")->required();
  eval_cmd->add_option("--format", eval_gold.format, "gold format")
      ->check(CLI::IsMember({"tsv", "csv", "jsonl"}));
  eval_cmd->add_option("--map", eval_gold.map, "gold column map");
  eval_split.add(eval_cmd, "dev");
  eval_cmd->add_option("--emb", eval_emb, "word embeddings for WMD");
  eval_cmd->add_flag("--json", eval_json, "JSON output");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the annotation service");
  ServiceConfig serve_cfg;
  std::string serve_data = serve_cfg.data_dir.string(), serve_model, serve_posts;
  std::size_t serve_snapshot = serve_cfg.store.snapshot_every;
  serve_cmd->add_option("--host", serve_cfg.host, "bind address")
      ->envname("SBF_HOST")
      ->capture_default_str();
  serve_cmd->add_option("--port", serve_cfg.port, "port, 0 for any")
      ->envname("SBF_PORT")
      ->capture_default_str();
  serve_cmd->add_option("--data-dir", serve_data, "store directory")
      ->envname("SBF_DATA_DIR")
      ->capture_default_str();
  serve_cmd->add_option("--model", serve_model, "model file for /api/analyze")->envname("SBF_MODEL");
  serve_cmd->add_option("--posts", serve_posts, "posts to annotate (jsonl or tsv)")
      ->envname("SBF_POSTS");
  serve_cmd->add_option("--quota", serve_cfg.quota, "submissions per worker per UTC day")
      ->envname("SBF_QUOTA")
      ->capture_default_str();
  serve_cmd->add_option("--target", serve_cfg.target, "annotations per post")
      ->envname("SBF_TARGET")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve_cmd->add_option("--snapshot-every", serve_snapshot, "records between snapshots, 0 = never")
      ->envname("SBF_SNAPSHOT_EVERY")
      ->capture_default_str();

  std::vector<const char*> argv = {"sbf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    detail::print_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (ingest_cmd->parsed()) {
      const Corpus c = ingest_in.load();
      detail::OutputFile o(ingest_out, out);
      write_jsonl(o.stream(), c);
      o.close();
      if (!ingest_rejects.empty()) {
        std::ofstream r(ingest_rejects);
        if (!r) throw IoError("cannot write '" + ingest_rejects + "'");
        for (const auto& x : c.rejects) {
          r << nlohmann::json{{"record", x.record}, {"reason", x.reason}}.dump() << "\n";
        }
      }
      if (ingest_json) {
        err << nlohmann::json{{"annotations", c.annotations.size()},
                              {"posts", c.posts.size()},
                              {"rejects", c.rejects.size()}}
                   .dump()
            << "\n";
      } else {
        err << c.annotations.size() << " annotations on " << c.posts.size() << " posts\n";
        detail::report_rejects(err, c);
      }
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      detail::CorpusFlags f = validate_in;
      f.lenient = true;
      const Corpus c = f.load();
      std::size_t bad = c.rejects.size();
      for (const auto& x : c.rejects) {
        if (validate_json) {
          out << nlohmann::json{{"record", x.record}, {"ok", false}, {"error", x.reason}}.dump()
              << "\n";
        } else {
          out << "record " << x.record << ": " << x.reason << "\n";
        }
      }
      for (const auto& a : c.annotations) {
        const auto v = validate(a);
        bad += v.ok() ? 0 : 1;
        if (validate_json) {
          auto j = to_json(v);
          j["post_id"] = a.post_id;
          j["worker_id"] = a.worker_id;
          out << j.dump() << "\n";
          continue;
        }
        for (const auto& x : v.violations) {
          out << a.post_id << "/" << a.worker_id << ": " << x.field << ": " << x.rule << "\n";
        }
        for (const auto& x : v.warnings) {
          out << a.post_id << "/" << a.worker_id << ": warning: " << x.field << ": " << x.rule
              << "\n";
        }
      }
      if (!validate_json) {
        out << (c.annotations.size() + c.rejects.size() - bad) << " valid, " << bad
            << " invalid\n";
      }
      return bad ? kExitFailure : kExitOk;
    }

    if (stats_cmd->parsed()) {
      const Corpus c = stats_in.load();
      const auto s = stats(c);
      if (stats_json) {
        auto j = to_json(s);
        j["rejects"] = c.rejects.size();
        nlohmann::json prov = nlohmann::json::object();
        for (const auto& [src, n] : c.provenance) prov[std::string(to_string(src))] = n;
        j["provenance"] = prov;
        out << j.dump(2) << "\n";
      } else {
        render(out, s);
        out << "provenance:";
        for (const auto& [src, n] : c.provenance) out << " " << to_string(src) << "=" << n;
        out << "\n";
        detail::report_rejects(err, c);
      }
      return kExitOk;
    }

    if (agree_cmd->parsed()) {
      const Corpus c = agree_in.load();
      const auto r = agreement(c);
      if (agree_json) {
        out << to_json(r).dump(2) << "\n";
      } else {
        render(out, r);
      }
      return kExitOk;
    }

    if (split_cmd->parsed()) {
      const auto ratios = detail::parse_ratios(split_ratios);
      const Corpus c = split_in.load();
      const auto s = split(c, {ratios[0], ratios[1], ratios[2]}, split_seed);
      detail::OutputFile o(split_out, out);
      s.write(o.stream());
      o.close();
      const nlohmann::json summary = {{"seed", split_seed},
                                      {"train", s.count(Split::kTrain)},
                                      {"dev", s.count(Split::kDev)},
                                      {"test", s.count(Split::kTest)}};
      if (split_json) {
        err << summary.dump() << "\n";
      } else {
        err << "train " << summary["train"] << ", dev " << summary["dev"] << ", test "
            << summary["test"] << " posts\n";
      }
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      train_cfg.smoothing =
          train_smoothing == "add-k" ? Smoothing::kAddK : Smoothing::kInterpolated;
      const Corpus all = train_in.load();
      const auto assignment = train_split.load();
      const Corpus part = assignment ? select_split(all, *assignment, train_split.which()) : all;
      const auto xs = instances(part);
      const auto model = train(frames_of(xs), train_cfg);
      model.save(train_out);
      nlohmann::json report = {{"instances", xs.size()},
                               {"posts", part.posts.size()},
                               {"vocab", model.vocab().size()},
                               {"train_loss", mean_loss(model, xs)},
                               {"uniform_loss", uniform_loss(model.vocab())}};
      if (assignment && train_split.which() == Split::kTrain) {
        const Corpus dev = select_split(all, *assignment, Split::kDev);
        if (!dev.annotations.empty()) report["dev_loss"] = mean_loss(model, instances(dev));
      }
      if (train_json) {
        out << report.dump(2) << "\n";
      } else {
        out << "instances " << report["instances"] << ", vocab " << report["vocab"]
            << ", train loss " << report["train_loss"].get<double>();
        if (report.contains("dev_loss")) out << ", dev loss " << report["dev_loss"].get<double>();
        out << ", uniform " << report["uniform_loss"].get<double>() << "\n";
      }
      return kExitOk;
    }

    if (decode_cmd->parsed()) {
      decode_cfg.mode = decode_mode == "greedy" ? DecodeMode::kGreedy : DecodeMode::kSample;
      if (decode_max_length) decode_cfg.max_length = decode_max_length;
      const auto model = NGramModel::load(decode_model);
      auto posts = read_posts(decode_in);
      if (const auto a = decode_split.load()) {
        std::vector<PostInput> kept;
        for (auto& p : posts) {
          const auto it = a->assignment.find(p.id);
          if (it != a->assignment.end() && it->second == decode_split.which()) kept.push_back(p);
        }
        posts = std::move(kept);
      }
      std::vector<DecodeFailure> failures;
      const auto decoded = decode_all(model, posts, decode_cfg, &failures);
      detail::OutputFile o(decode_out, out);
      for (const auto& [id, d] : decoded) o.stream() << to_json(d, id).dump() << "\n";
      o.close();
      for (const auto& f : failures) err << "post " << f.post_id << ": " << f.reason << "\n";
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      std::ifstream pin(eval_pred);
      if (!pin) throw IoError("cannot read '" + eval_pred + "'");
      std::vector<std::pair<std::string, DecodedFrame>> pred;
      std::string line;
      while (std::getline(pin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          pred.push_back(decoded_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
          throw IoError(std::string("predictions: malformed JSON: ") + e.what());
        }
      }
      const Corpus all = eval_gold.load();
      const auto assignment = eval_split.load();
      const Corpus gold = assignment ? select_split(all, *assignment, eval_split.which()) : all;
      std::optional<EmbeddingTable> emb;
      if (!eval_emb.empty()) emb = EmbeddingTable::load(eval_emb);
      const auto report = evaluate_run(pred, aggregate_corpus(gold), emb ? &*emb : nullptr);
      if (eval_json) {
        out << to_json(report).dump(2) << "\n";
      } else {
        render(out, report, assignment ? eval_split.name + "." : std::string("all"));
      }
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      serve_cfg.data_dir = serve_data;
      if (!serve_model.empty()) serve_cfg.model_path = serve_model;
      if (!serve_posts.empty()) serve_cfg.posts_path = serve_posts;
      serve_cfg.store.snapshot_every = serve_snapshot;
      Service service(serve_cfg);
      HttpServer http(service);
      const int port = http.bind(serve_cfg.host, serve_cfg.port);
      detail::stop_flag().store(false);
      std::signal(SIGINT, detail::on_signal);
      std::signal(SIGTERM, detail::on_signal);
      std::thread watcher([&] {
        while (!detail::stop_flag().load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        http.stop();
      });
      const auto& info = service.store().replay_info();
      out << "listening on http://" << serve_cfg.host << ":" << port << " (" << service.store().size()
          << " annotations, replayed " << info.log_records << " log records";
      if (info.torn_bytes) out << ", cut " << info.torn_bytes << " torn bytes";
      out << ")" << std::endl;
      http.listen();
      detail::stop_flag().store(true);
      watcher.join();
      return kExitOk;
    }
  } catch (const sbf::ValidationError& e) {
    detail::print_error(err, "validation", e.what());
    return kExitFailure;
  } catch (const sbf::ParseError& e) {
    detail::print_error(err, "parse", e.what());
    return kExitFailure;
  } catch (const IoError& e) {
    detail::print_error(err, "io", e.what());
    return kExitFailure;
  } catch (const InvalidArgument& e) {
    detail::print_error(err, "invalid_argument", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    detail::print_error(err, "runtime", e.what());
    return kExitFailure;
  }
  detail::print_error(err, "usage", "no subcommand");
  return kExitUsage;
}

}  // namespace sbf::cli

#endif  // SBF_CLI_HPP
