#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>

#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/oracle.hpp"

namespace triage {

/// Local HTTP oracle that answers from fixture entries and counts hits per
/// (video_id, myth_index) key. Serves POST /label and /judge (judge entries
/// use myth_index 0), GET /stats, POST /reset. Used to exercise the live
/// oracle path without a model server, and to audit duplicate calls.
class OracleFixtureServer {
 public:
  explicit OracleFixtureServer(std::map<LabelKey, std::string> entries)
      : entries_(std::move(entries)) {
    server_.Post("/label", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      handle_(req, res, /*judge=*/false);
    });
    server_.Post("/judge", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      handle_(req, res, /*judge=*/true);
    });
    server_.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(stats().dump(), "application/json");
    });
    server_.Post("/reset", [this](const httplib::Request&, httplib::Response& res) {
      reset();
      res.set_content("{}", "application/json");
    });
  }

  static std::map<LabelKey, std::string> entries_from_file(
      const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open oracle fixture file: " + path.string());
    std::map<LabelKey, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what(), line_no);
      }
      if (!j.contains("video_id") || !j.contains("myth_index")) {
        throw ParseError("fixture entry needs video_id and myth_index", line_no);
      }
      LabelKey key{j["video_id"].get<std::string>(), j["myth_index"].get<int>()};
      json response = j;
      response.erase("video_id");
      response.erase("myth_index");
      entries[std::move(key)] = response.dump();
    }
    return entries;
  }

  ~OracleFixtureServer() { stop(); }

  OracleFixtureServer(const OracleFixtureServer&) = delete;
  OracleFixtureServer& operator=(const OracleFixtureServer&) = delete;

  /// Binds a free port and serves on a background thread. Returns the port.
  int start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw ConfigError("fixture server could not bind a port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  void start_on(int port) {
    if (!server_.bind_to_port("127.0.0.1", port)) {
      throw ConfigError("fixture server could not bind port " +
                        std::to_string(port));
    }
    port_ = port;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }

  /// First `n` requests answer 503, for exercising retry paths.
  void fail_next(int n) { fail_remaining_.store(n); }

  std::int64_t hits(const LabelKey& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = hits_.find(key);
    return it == hits_.end() ? 0 : it->second;
  }

  std::int64_t total_hits() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::int64_t total = 0;
    for (const auto& [key, count] : hits_) total += count;
    return total;
  }

  std::int64_t max_hits_per_key() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::int64_t m = 0;
    for (const auto& [key, count] : hits_) m = std::max(m, count);
    return m;
  }

  void reset() {
    std::lock_guard<std::mutex> lock(mutex_);
    hits_.clear();
  }

  json stats() const {
    std::lock_guard<std::mutex> lock(mutex_);
    json j;
    std::int64_t total = 0;
    json per_key = json::array();
    for (const auto& [key, count] : hits_) {
      total += count;
      json e;
      e["video_id"] = key.first;
      e["myth_index"] = key.second;
      e["count"] = count;
      per_key.push_back(std::move(e));
    }
    j["total"] = total;
    j["per_key"] = std::move(per_key);
    return j;
  }

 private:
  void handle_(const httplib::Request& req, httplib::Response& res, bool judge) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content("{\"error\":\"bad request body\"}", "application/json");
      return;
    }
    if (!body.contains("video_id")) {
      res.status = 400;
      res.set_content("{\"error\":\"missing video_id\"}", "application/json");
      return;
    }
    LabelKey key{body["video_id"].get<std::string>(),
                 judge ? OracleClient::kJudgeKey
                       : body.value("myth_index", 0)};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++hits_[key];  // every attempt counts, including injected failures
    }
    if (fail_remaining_.load() > 0 && fail_remaining_.fetch_sub(1) > 0) {
      res.status = 503;
      res.set_content("{\"error\":\"injected failure\"}", "application/json");
      return;
    }
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      res.status = 404;
      res.set_content("{\"error\":\"no fixture entry\"}", "application/json");
      return;
    }
    res.set_content(it->second, "application/json");
  }

  httplib::Server server_;
  std::thread thread_;
  std::map<LabelKey, std::string> entries_;
  mutable std::mutex mutex_;
  std::map<LabelKey, std::int64_t> hits_;
  std::atomic<int> fail_remaining_{0};
  int port_ = 0;
};

}  // namespace triage
