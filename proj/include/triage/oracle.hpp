#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/records.hpp"
#include "triage/rng.hpp"

namespace triage {

/// One oracle answer: the stance label plus the supporting excerpts and
/// justification the labeling protocol asks for, and the cost counters.
struct OracleVerdict {
  StanceLabel label = StanceLabel::Neither;
  std::vector<std::string> excerpts;
  std::string justification;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_seconds = 0;
};

/// Parses an oracle response body: {"LABEL": -1|0|1, "EXCERPTS": [..],
/// "JUSTIFICATION": "..", "usage": {"input_tokens": n, "output_tokens": n}}.
/// LABEL is mandatory; the rest default when absent.
inline OracleVerdict parse_oracle_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw OracleBadJson(std::string("oracle response is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw OracleBadJson("oracle response is not an object");
  auto label_it = j.find("LABEL");
  if (label_it == j.end() || !label_it->is_number_integer()) {
    throw OracleBadJson("oracle response lacks an integer LABEL");
  }
  const int raw = label_it->get<int>();
  if (raw < -1 || raw > 1) {
    throw OracleBadLabel("oracle LABEL outside {-1,0,1}: " + std::to_string(raw));
  }
  OracleVerdict v;
  v.label = stance_from_int(raw);
  if (auto it = j.find("EXCERPTS"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw OracleBadJson("EXCERPTS is not an array");
    for (const auto& e : *it) {
      if (!e.is_string()) throw OracleBadJson("EXCERPTS entry is not a string");
      v.excerpts.push_back(e.get<std::string>());
    }
  }
  if (auto it = j.find("JUSTIFICATION"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw OracleBadJson("JUSTIFICATION is not a string");
    v.justification = it->get<std::string>();
  }
  if (auto it = j.find("usage"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw OracleBadJson("usage is not an object");
    v.input_tokens = it->value("input_tokens", std::int64_t{0});
    v.output_tokens = it->value("output_tokens", std::int64_t{0});
    if (v.input_tokens < 0 || v.output_tokens < 0) {
      throw OracleBadJson("usage token counts must be >= 0");
    }
  }
  return v;
}

struct OracleConfig {
  // HTTP mode
  std::string host;
  int port = 0;
  std::string label_path = "/label";
  std::string judge_path = "/judge";
  std::string token;  // bearer auth, usually from ORACLE_TOKEN
  int timeout_ms = 30000;

  // replay mode (takes precedence when set)
  std::filesystem::path replay_path;

  // request template
  int shots = 5;
  double temperature = 0.2;  // passed through; honoring it is server-side

  // retry policy for transient failures
  int max_attempts = 3;
  int backoff_initial_ms = 1000;

  int max_inflight = 4;
};

/// Client side of the oracle labeling protocol. Two modes share one
/// interface: live JSON-over-HTTP, or replay from a fixture file keyed by
/// (video_id, myth_index); judge entries use myth_index 0.
class OracleClient {
 public:
  static constexpr int kJudgeKey = 0;

  explicit OracleClient(OracleConfig cfg)
      : cfg_(std::move(cfg)),
        inflight_(std::make_unique<std::counting_semaphore<4096>>(
            cfg_.max_inflight > 0 ? cfg_.max_inflight : 1)) {
    if (!cfg_.replay_path.empty()) {
      load_replay_(cfg_.replay_path);
      replay_mode_ = true;
    } else if (cfg_.host.empty() || cfg_.port <= 0) {
      throw ConfigError("oracle needs either a replay file or host and port");
    } else {
      fingerprint_ = "oracle-http:" + cfg_.host + ":" + std::to_string(cfg_.port) +
                     cfg_.label_path;
    }
  }

  /// Replay client over in-memory fixture entries (response body per key).
  static OracleClient replay_in_memory(std::map<LabelKey, std::string> entries,
                                       OracleConfig cfg = {}) {
    OracleClient client;
    client.cfg_ = std::move(cfg);
    client.inflight_ = std::make_unique<std::counting_semaphore<4096>>(
        client.cfg_.max_inflight > 0 ? client.cfg_.max_inflight : 1);
    client.replay_ = std::move(entries);
    client.replay_mode_ = true;
    std::uint64_t hash = fnv1a64("oracle-replay");
    for (const auto& [key, body] : client.replay_) {
      hash = fnv1a64(key.first, hash);
      hash = fnv1a64_u64(static_cast<std::uint64_t>(key.second), hash);
      hash = fnv1a64(body, hash);
    }
    client.fingerprint_ = "oracle-replay:" + to_hex(hash);
    return client;
  }

  bool replay_mode() const { return replay_mode_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const OracleConfig& config() const { return cfg_; }

  /// Labels one (record, myth) pair via the oracle protocol.
  OracleVerdict label(const VideoRecord& rec, const MythId& myth) const {
    if (replay_mode_) return replay_lookup_(rec.video_id, myth.index());
    json body;
    body["video_id"] = rec.video_id;
    body["myth_index"] = myth.index();
    body["myth_definition"] = myth.definition();
    body["title"] = rec.title;
    body["description"] = rec.description;
    body["transcript"] = rec.transcript;
    body["tags"] = rec.tags;
    body["shots"] = cfg_.shots;
    body["temperature"] = cfg_.temperature;
    return post_with_retry_(cfg_.label_path, body);
  }

  /// Asks the judge for a video's overall stance given its per-myth labels.
  OracleVerdict judge_overall(const VideoRecord& rec,
                              const std::map<int, StanceLabel>& myth_labels) const {
    if (replay_mode_) return replay_lookup_(rec.video_id, kJudgeKey);
    json labels;
    for (const auto& [myth, stance] : myth_labels) {
      labels[myth_key(myth)] = stance_to_int(stance);
    }
    json body;
    body["video_id"] = rec.video_id;
    body["myth_labels"] = labels;
    body["title"] = rec.title;
    body["description"] = rec.description;
    body["transcript"] = rec.transcript;
    body["tags"] = rec.tags;
    body["temperature"] = cfg_.temperature;
    return post_with_retry_(cfg_.judge_path, body);
  }

 private:
  OracleClient() = default;

  void load_replay_(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open oracle fixture file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t hash = fnv1a64("oracle-replay");
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      hash = fnv1a64(line, hash);
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
      replay_[std::move(key)] = response.dump();
    }
    fingerprint_ = "oracle-replay:" + to_hex(hash);
  }

  OracleVerdict replay_lookup_(const std::string& video_id, int myth_index) const {
    auto it = replay_.find(LabelKey{video_id, myth_index});
    if (it == replay_.end()) {
      throw MissingFixture("no oracle fixture entry for " + video_id + "/" +
                           std::to_string(myth_index));
    }
    return parse_oracle_response(it->second);
  }

  OracleVerdict post_with_retry_(const std::string& path, const json& body) const {
    inflight_->acquire();
    struct Release {
      std::counting_semaphore<4096>* sem;
      ~Release() { sem->release(); }
    } release{inflight_.get()};

    const std::string payload = body.dump();
    std::string last_error;
    int backoff_ms = cfg_.backoff_initial_ms;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms *= 2;
      }
      httplib::Client client(cfg_.host, cfg_.port);
      client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
      client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
      if (!cfg_.token.empty()) {
        client.set_default_headers({{"Authorization", "Bearer " + cfg_.token}});
      }
      const auto start = std::chrono::steady_clock::now();
      auto res = client.Post(path, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;  // transient
      }
      if (res->status >= 500) {
        last_error = "oracle returned status " + std::to_string(res->status);
        continue;  // transient
      }
      if (res->status != 200) {
        throw OracleUnreachable("oracle returned status " +
                                std::to_string(res->status));
      }
      OracleVerdict v = parse_oracle_response(res->body);
      v.latency_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      return v;
    }
    throw OracleUnreachable("oracle unreachable after " +
                            std::to_string(cfg_.max_attempts) +
                            " attempts: " + last_error);
  }

  OracleConfig cfg_;
  bool replay_mode_ = false;
  std::map<LabelKey, std::string> replay_;
  std::string fingerprint_;
  mutable std::unique_ptr<std::counting_semaphore<4096>> inflight_;
};

}  // namespace triage
