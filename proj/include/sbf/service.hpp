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

// Annotation service: hands out annotation tasks, accepts validated
// submissions into the durable Store, runs constrained decoding on demand
// and reports corpus statistics, all behind a small HTTP+JSON API.
//
//   GET  /api/tasks/next?worker=ID   next task for a worker
//   POST /api/annotations            {"task_id", "annotation", "demographics"?}
//   POST /api/analyze                {"text"}
//   GET  /api/stats                  corpus statistics over stored annotations
//   GET  /api/agreement              agreement over stored annotations
//
// Errors are {"error": {"code", "message", ...}} with a matching status.

#ifndef SBF_SERVICE_HPP
#define SBF_SERVICE_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "sbf/corpus.hpp"
#include "sbf/decoder.hpp"
#include "sbf/frame_json.hpp"
#include "sbf/ngram.hpp"
#include "sbf/report.hpp"
#include "sbf/store.hpp"

namespace sbf {

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "sbf-data";
  std::optional<std::filesystem::path> model_path;
  std::optional<std::filesystem::path> posts_path;
  std::size_t quota = 200;  // accepted submissions per worker per UTC day
  std::size_t target = 3;   // annotations per post
  std::chrono::seconds lease{30 * 60};
  StoreOptions store;
};

// Error carried to the HTTP layer as a status and a machine-readable body.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message,
               nlohmann::json detail = nullptr)
      : Error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  nlohmann::json body() const {
    nlohmann::json e = {{"code", code_}, {"message", what()}};
    if (!detail_.is_null()) e["detail"] = detail_;
    return {{"error", std::move(e)}};
  }

 private:
  int status_;
  std::string code_;
  nlohmann::json detail_;
};

struct AnnotationTask {
  std::string task_id;
  Post post;
  std::chrono::system_clock::time_point lease_expires;
};

// Questions a fresh task unlocks, and the rule that unlocks each later one.
inline nlohmann::json question_flow() {
  return {{"unlocked", {"offensive", "intent", "lewd"}},
          {"conditional",
           {{{"question", "group"}, {"requires", "offensive in {yes, maybe}"}},
            {{"question", "targets"}, {"requires", "group = yes"}},
            {{"question", "ingroup"}, {"requires", "at least one target"}}}}};
}

namespace detail {

inline std::string utc_day(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
  return buf;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Posts file: JSONL {"post_id","text","source"?} or a TSV with a header
// naming post_id, post (or text) and optionally source.
inline std::vector<Post> load_posts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read posts '" + path.string() + "'");
  std::vector<Post> out;
  std::string line;
  if (path.extension() == ".jsonl") {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        out.push_back({j.at("post_id").get<std::string>(), j.at("text").get<std::string>(),
                       parse_source(j.value("source", std::string("other")))});
      } catch (const nlohmann::json::exception& e) {
        throw IoError("posts: malformed JSON line: " + std::string(e.what()));
      }
    }
    return out;
  }
  if (!std::getline(in, line)) throw IoError("posts: empty file");
  const auto header = split_tsv_line(line);
  auto col = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      for (const char* n : names) {
        if (header[i] == n) return i;
      }
    }
    return std::nullopt;
  };
  const auto id = col({"post_id"}), text = col({"post", "text"}), source = col({"source"});
  if (!id || !text) throw IoError("posts: header needs post_id and post columns");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_tsv_line(line);
    if (f.size() <= std::max(*id, *text)) throw IoError("posts: short row");
    out.push_back({f[*id], escape_control_tokens(f[*text]),
                   source && *source < f.size() ? parse_source(f[*source]) : Source::kOther});
  }
  return out;
}

}  // namespace detail

class Service {
 public:
  explicit Service(ServiceConfig cfg, Clock clock = std::chrono::system_clock::now)
      : cfg_(std::move(cfg)), clock_(std::move(clock)), store_(cfg_.data_dir, cfg_.store) {
    if (cfg_.target < 1) throw InvalidArgument("annotation target must be >= 1");
    if (cfg_.posts_path) {
      for (const auto& p : detail::load_posts(*cfg_.posts_path)) store_.add_post(p);
    }
    if (cfg_.model_path) model_ = std::make_unique<NGramModel>(NGramModel::load(cfg_.model_path->string()));
    for (const auto& r : store_.records()) count(r);
  }

  const ServiceConfig& config() const { return cfg_; }
  Store& store() { return store_; }
  bool has_model() const { return model_ != nullptr; }

  // A post below the annotation target that the worker has not annotated,
  // in post-id order. Repeated calls while a lease is live return the same
  // task. nullopt when nothing is left.
  std::optional<AnnotationTask> next_task(const std::string& worker) {
    if (worker.empty()) throw ServiceError(400, "bad_request", "worker is required");
    const auto now = clock_();
    std::lock_guard lock(mu_);
    check_quota(worker, now);
    for (const auto& [id, l] : leases_) {
      if (l.worker == worker && l.expires > now) return task(id, l);
    }
    std::map<std::string, std::size_t> leased;
    for (const auto& [id, l] : leases_) {
      if (l.worker != worker && l.expires > now) ++leased[l.post];
    }
    const auto posts = store_.posts();
    const auto& mine = annotated_[worker];
    for (const auto& [pid, post] : posts) {
      if (mine.count(pid)) continue;
      const auto c = completed_.find(pid);
      const auto busy = leased.find(pid);
      if ((c == completed_.end() ? 0 : c->second) + (busy == leased.end() ? 0 : busy->second) >=
          cfg_.target) {
        continue;
      }
      const std::string id = task_id(pid, worker);
      Lease l{pid, worker, now + cfg_.lease};
      leases_[id] = l;
      return task(id, l);
    }
    return std::nullopt;
  }

  // Validates and stores a submission. Returns the ack body; a repeated
  // task id acknowledges the first receipt again.
  nlohmann::json submit(const nlohmann::json& body) {
    if (!body.is_object()) throw ServiceError(400, "bad_request", "body must be a JSON object");
    if (!body.contains("task_id") || !body["task_id"].is_string()) {
      throw ServiceError(400, "bad_request", "task_id is required");
    }
    if (!body.contains("annotation")) throw ServiceError(400, "bad_request", "annotation is required");
    const std::string tid = body["task_id"].get<std::string>();
    nlohmann::json demographics = body.value("demographics", nlohmann::json());

    if (const auto prior = store_.find_task(tid)) return ack(*prior, true);

    FrameAnnotation a;
    try {
      a = annotation_from_json(body["annotation"]);
    } catch (const ValidationError& e) {
      throw ServiceError(422, "validation", e.what(),
                         nlohmann::json::array({{{"field", "annotation"}, {"rule", e.what()}}}));
    }
    const auto v = validate(a);
    if (!v.ok()) {
      throw ServiceError(422, "validation", "annotation violates the frame hierarchy",
                         to_json(v)["violations"]);
    }

    const auto now = clock_();
    std::lock_guard lock(mu_);
    if (const auto prior = store_.find_task(tid)) return ack(*prior, true);
    const auto it = leases_.find(tid);
    if (it == leases_.end()) throw ServiceError(404, "unknown_task", "task '" + tid + "' was not issued");
    const Lease& l = it->second;
    if (a.post_id != l.post || a.worker_id != l.worker) {
      throw ServiceError(422, "task_mismatch", "annotation post_id/worker_id do not match the task");
    }
    check_quota(l.worker, now);
    if (annotated_[l.worker].count(l.post)) {
      throw ServiceError(409, "already_annotated", "worker already annotated this post");
    }
    if (completed_[l.post] >= cfg_.target) {
      throw ServiceError(409, "post_complete", "post already has its target annotations");
    }
    bool duplicate = false;
    const auto stored = store_.append(tid, a, detail::utc_day(now), demographics, &duplicate);
    if (!duplicate) count(stored);
    leases_.erase(tid);
    return ack(stored, duplicate);
  }

  nlohmann::json analyze(const nlohmann::json& body) {
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      throw ServiceError(400, "bad_request", "text is required");
    }
    const std::string text = body["text"].get<std::string>();
    if (normalize_phrase(text).empty()) throw ServiceError(400, "empty_text", "post text is empty");
    if (!model_) throw ServiceError(503, "no_model", "no model is loaded");
    DecodedFrame d;
    try {
      d = decode_constrained(*model_, text);
    } catch (const InvalidArgument& e) {
      throw ServiceError(422, "undecodable", e.what());
    }
    nlohmann::json out = to_json(d, body.value("post_id", std::string()));
    const auto a = to_annotation(d, body.value("post_id", std::string("analyze")));
    out["annotation"] = to_json(a);
    out["valid"] = validate(a).ok();
    return out;
  }

  Corpus corpus() const {
    const auto posts = store_.posts();
    std::vector<Post> p;
    for (const auto& [id, post] : posts) p.push_back(post);
    std::vector<FrameAnnotation> anns;
    for (const auto& r : store_.records()) anns.push_back(r.annotation);
    return make_corpus(p, anns);
  }

  nlohmann::json stats_json() const {
    const Corpus c = corpus();
    auto j = to_json(stats(c));
    j["posts_registered"] = c.posts.size();
    return j;
  }

  nlohmann::json agreement_json() const { return to_json(agreement(corpus())); }

  static std::string task_id(const std::string& post, const std::string& worker) {
    return post + "::" + worker;
  }

 private:
  struct Lease {
    std::string post;
    std::string worker;
    std::chrono::system_clock::time_point expires;
  };

  AnnotationTask task(const std::string& id, const Lease& l) const {
    const auto posts = store_.posts();
    return {id, posts.at(l.post), l.expires};
  }

  void check_quota(const std::string& worker, std::chrono::system_clock::time_point now) {
    const auto key = std::make_pair(worker, detail::utc_day(now));
    if (daily_[key] >= cfg_.quota) {
      throw ServiceError(429, "quota_exceeded",
                         "worker '" + worker + "' reached the daily cap of " +
                             std::to_string(cfg_.quota));
    }
  }

  void count(const StoredAnnotation& r) {
    ++completed_[r.annotation.post_id];
    annotated_[r.annotation.worker_id].insert(r.annotation.post_id);
    ++daily_[{r.annotation.worker_id, r.day}];
  }

  static nlohmann::json ack(const StoredAnnotation& r, bool duplicate) {
    return {{"receipt", r.receipt}, {"task_id", r.task_id}, {"duplicate", duplicate}};
  }

  ServiceConfig cfg_;
  Clock clock_;
  Store store_;
  std::unique_ptr<NGramModel> model_;
  std::mutex mu_;
  std::map<std::string, Lease> leases_;
  std::map<std::string, std::size_t> completed_;
  std::map<std::string, std::set<std::string>> annotated_;
  std::map<std::pair<std::string, std::string>, std::size_t> daily_;
};

inline nlohmann::json to_json(const AnnotationTask& t) {
  return {{"task_id", t.task_id},
          {"post", detail::post_json(t.post)},
          {"lease_expires", detail::utc_timestamp(t.lease_expires)},
          {"flow", question_flow()}};
}

// HTTP front end over a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service) : service_(service) { routes(); }

  // Binds and returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      port_ = server_.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port_;
  }

  // Blocks until stop().
  void listen() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  bool running() const { return server_.is_running(); }

 private:
  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <class F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      reply(res, 200, f());
    } catch (const ServiceError& e) {
      reply(res, e.status(), e.body());
    } catch (const nlohmann::json::exception& e) {
      reply(res, 400, ServiceError(400, "bad_request", e.what()).body());
    } catch (const std::exception& e) {
      reply(res, 500, ServiceError(500, "internal", e.what()).body());
    }
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw ServiceError(400, "bad_json", std::string("malformed JSON body: ") + e.what());
    }
  }

  void routes() {
    server_.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&]() -> nlohmann::json {
        const auto t = service_.next_task(req.get_param_value("worker"));
        if (!t) return {{"task", nullptr}};
        return {{"task", to_json(*t)}};
      });
    });
    server_.Post("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { return service_.submit(parse_body(req)); });
    });
    server_.Post("/api/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { return service_.analyze(parse_body(req)); });
    });
    server_.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { return service_.stats_json(); });
    });
    server_.Get("/api/agreement", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { return service_.agreement_json(); });
    });
    server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(
            ServiceError(res.status, "not_found", "no such endpoint").body().dump(),
            "application/json");
      }
    });
  }

  Service& service_;
  httplib::Server server_;
  int port_ = -1;
};

}  // namespace sbf

#endif  // SBF_SERVICE_HPP
