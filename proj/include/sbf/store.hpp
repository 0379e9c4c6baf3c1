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

// Durable annotation store: an append-only JSONL log plus an occasional
// snapshot. Every record is written with a single append and fsync'd
// before the caller is told it is stored. On open, the snapshot is loaded
// and the log replayed on top of it; a torn final line left by a crash is
// cut off.
//
// Layout of the data directory:
//   log.jsonl       one JSON record per line, each with a sequence number
//   snapshot.json   full state up to some sequence number (optional)

#ifndef SBF_STORE_HPP
#define SBF_STORE_HPP

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbf/error.hpp"
#include "sbf/frame.hpp"
#include "sbf/frame_json.hpp"

namespace sbf {

struct StoredAnnotation {
  std::uint64_t seq = 0;
  std::string receipt;
  std::string task_id;
  std::string day;  // UTC date of acceptance, YYYY-MM-DD
  FrameAnnotation annotation;
  nlohmann::json demographics;  // null when absent; stored, never analyzed
};

struct StoreOptions {
  std::size_t snapshot_every = 1000;  // records between snapshots; 0 disables
  bool sync = true;                   // fsync each record before acknowledging
};

struct ReplayInfo {
  std::uint64_t snapshot_seq = 0;
  std::size_t log_records = 0;
  std::size_t torn_bytes = 0;  // bytes cut from the end of the log
};

namespace detail {

inline std::string errno_text(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

inline void write_all(int fd, const std::string& data, const std::string& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(errno_text("write " + path));
    }
    done += static_cast<std::size_t>(n);
  }
}

inline void fsync_dir(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

inline nlohmann::json post_json(const Post& p) {
  return {{"post_id", p.id}, {"text", p.text}, {"source", std::string(to_string(p.source))}};
}

inline Post post_from_json(const nlohmann::json& j) {
  return Post{j.at("post_id").get<std::string>(), j.at("text").get<std::string>(),
              parse_source(j.value("source", std::string("other")))};
}

inline nlohmann::json record_json(const StoredAnnotation& r) {
  return {{"seq", r.seq},
          {"type", "annotation"},
          {"receipt", r.receipt},
          {"task_id", r.task_id},
          {"day", r.day},
          {"annotation", to_json(r.annotation)},
          {"demographics", r.demographics}};
}

inline StoredAnnotation record_from_json(const nlohmann::json& j) {
  StoredAnnotation r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.receipt = j.at("receipt").get<std::string>();
  r.task_id = j.at("task_id").get<std::string>();
  r.day = j.at("day").get<std::string>();
  r.annotation = annotation_from_json(j.at("annotation"));
  r.demographics = j.value("demographics", nlohmann::json());
  return r;
}

}  // namespace detail

class Store {
 public:
  explicit Store(std::filesystem::path dir, StoreOptions opts = {})
      : dir_(std::move(dir)), opts_(opts) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create data directory '" + dir_.string() + "': " + ec.message());
    load_snapshot();
    replay_log();
    fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError(detail::errno_text("open " + log_path().string()));
  }

  ~Store() {
    if (fd_ >= 0) ::close(fd_);
  }
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::filesystem::path log_path() const { return dir_ / "log.jsonl"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }
  const ReplayInfo& replay_info() const { return replay_; }

  // Registers a post; returns false if the id is already known.
  bool add_post(const Post& p) {
    std::unique_lock lock(mu_);
    if (posts_.count(p.id)) return false;
    nlohmann::json rec = {{"seq", next_seq_}, {"type", "post"}, {"post", detail::post_json(p)}};
    append_line(rec.dump());
    posts_.emplace(p.id, p);
    ++next_seq_;
    after_append();
    return true;
  }

  // Appends an accepted annotation and returns its record. A task id that
  // is already stored returns the first record instead, with *duplicate set.
  StoredAnnotation append(const std::string& task_id, const FrameAnnotation& a,
                          const std::string& day, const nlohmann::json& demographics,
                          bool* duplicate = nullptr) {
    std::unique_lock lock(mu_);
    if (const auto it = by_task_.find(task_id); it != by_task_.end()) {
      if (duplicate) *duplicate = true;
      return records_[it->second];
    }
    if (duplicate) *duplicate = false;
    StoredAnnotation r;
    r.seq = next_seq_;
    r.receipt = receipt_for(r.seq);
    r.task_id = task_id;
    r.day = day;
    r.annotation = a;
    r.demographics = demographics;
    append_line(detail::record_json(r).dump());
    ++next_seq_;
    index(r);
    after_append();
    return r;
  }

  std::optional<StoredAnnotation> find_task(const std::string& task_id) const {
    std::shared_lock lock(mu_);
    const auto it = by_task_.find(task_id);
    if (it == by_task_.end()) return std::nullopt;
    return records_[it->second];
  }

  // Copies taken under a shared lock.
  std::map<std::string, Post> posts() const {
    std::shared_lock lock(mu_);
    return posts_;
  }
  std::vector<StoredAnnotation> records() const {
    std::shared_lock lock(mu_);
    return records_;
  }
  std::size_t size() const {
    std::shared_lock lock(mu_);
    return records_.size();
  }

  // Writes the full state to snapshot.json by atomic rename, then empties
  // the log. Records in the log at or below the snapshot's sequence number
  // are skipped on replay, so a crash between the two steps is harmless.
  void snapshot() {
    std::unique_lock lock(mu_);
    write_snapshot();
  }

  static std::string receipt_for(std::uint64_t seq) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%010llu", static_cast<unsigned long long>(seq));
    return buf;
  }

 private:
  void append_line(const std::string& line) {
    detail::write_all(fd_, line + "\n", log_path().string());
    if (opts_.sync && ::fsync(fd_) != 0) throw IoError(detail::errno_text("fsync log"));
  }

  void after_append() {
    if (opts_.snapshot_every && ++since_snapshot_ >= opts_.snapshot_every) write_snapshot();
  }

  void write_snapshot() {
    nlohmann::json posts = nlohmann::json::array();
    for (const auto& [id, p] : posts_) posts.push_back(detail::post_json(p));
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records_) recs.push_back(detail::record_json(r));
    const nlohmann::json snap = {{"format", "sbf-store-snapshot"},
                                 {"version", 1},
                                 {"seq", next_seq_ - 1},
                                 {"posts", std::move(posts)},
                                 {"annotations", std::move(recs)}};
    const auto tmp = dir_ / "snapshot.json.tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError(detail::errno_text("open " + tmp.string()));
    try {
      detail::write_all(fd, snap.dump() + "\n", tmp.string());
      if (::fsync(fd) != 0) throw IoError(detail::errno_text("fsync snapshot"));
    } catch (...) {
      ::close(fd);
      throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), snapshot_path().c_str()) != 0) {
      throw IoError(detail::errno_text("rename snapshot"));
    }
    detail::fsync_dir(dir_);
    if (::ftruncate(fd_, 0) != 0) throw IoError(detail::errno_text("truncate log"));
    if (opts_.sync) ::fsync(fd_);
    since_snapshot_ = 0;
  }

  void index(const StoredAnnotation& r) {
    by_task_[r.task_id] = records_.size();
    records_.push_back(r);
  }

  void load_snapshot() {
    std::ifstream in(snapshot_path(), std::ios::binary);
    if (!in) return;
    try {
      nlohmann::json j;
      in >> j;
      if (j.at("format") != "sbf-store-snapshot" || j.at("version") != 1) {
        throw IoError("store: unsupported snapshot format");
      }
      replay_.snapshot_seq = j.at("seq").get<std::uint64_t>();
      for (const auto& p : j.at("posts")) {
        const Post post = detail::post_from_json(p);
        posts_.emplace(post.id, post);
      }
      for (const auto& r : j.at("annotations")) index(detail::record_from_json(r));
      next_seq_ = replay_.snapshot_seq + 1;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("store: corrupt snapshot: ") + e.what());
    }
  }

  void replay_log() {
    std::ifstream in(log_path(), std::ios::binary);
    if (!in) return;
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    in.close();

    std::size_t pos = 0, good_end = 0, lineno = 0;
    while (pos < data.size()) {
      const std::size_t nl = data.find('\n', pos);
      if (nl == std::string::npos) break;  // torn: no terminating newline
      ++lineno;
      const std::string line = data.substr(pos, nl - pos);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        if (nl + 1 == data.size()) break;  // garbage final line counts as torn
        throw IoError("store: corrupt log record at line " + std::to_string(lineno));
      }
      try {
        apply(j);
      } catch (const std::exception& e) {
        throw IoError("store: bad log record at line " + std::to_string(lineno) + ": " + e.what());
      }
      pos = nl + 1;
      good_end = pos;
    }
    if (good_end < data.size()) {
      replay_.torn_bytes = data.size() - good_end;
      std::filesystem::resize_file(log_path(), good_end);
    }
  }

  void apply(const nlohmann::json& j) {
    const auto seq = j.at("seq").get<std::uint64_t>();
    if (seq <= replay_.snapshot_seq && replay_.snapshot_seq) return;
    if (seq != next_seq_) {
      throw IoError("sequence gap: expected " + std::to_string(next_seq_) + ", got " +
                    std::to_string(seq));
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "post") {
      const Post p = detail::post_from_json(j.at("post"));
      posts_.emplace(p.id, p);
    } else if (type == "annotation") {
      StoredAnnotation r = detail::record_from_json(j);
      if (by_task_.count(r.task_id)) throw IoError("duplicate task id '" + r.task_id + "'");
      index(r);
    } else {
      throw IoError("unknown record type '" + type + "'");
    }
    ++next_seq_;
    ++replay_.log_records;
  }

  std::filesystem::path dir_;
  StoreOptions opts_;
  ReplayInfo replay_;
  int fd_ = -1;
  mutable std::shared_mutex mu_;
  std::uint64_t next_seq_ = 1;
  std::size_t since_snapshot_ = 0;
  std::map<std::string, Post> posts_;
  std::vector<StoredAnnotation> records_;
  std::map<std::string, std::size_t> by_task_;
};

}  // namespace sbf

#endif  // SBF_STORE_HPP
