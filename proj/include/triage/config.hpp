#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "triage/costmodel.hpp"
#include "triage/deferral.hpp"
#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/oracle.hpp"
#include "triage/records.hpp"
#include "triage/scorers.hpp"

namespace triage {

struct ScorerSelection {
  std::string type = "stub";  // stub | replay | simulated | remote
  std::array<double, 3> stub_probs{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::filesystem::path replay_path;
  SimulatedScorerSpec simulated;
  RemoteScorerConfig remote;

  json to_json() const {
    json j;
    j["type"] = type;
    if (type == "stub") j["stub_probs"] = stub_probs;
    if (type == "replay") j["replay_path"] = replay_path.string();
    if (type == "simulated") j["simulated"] = simulated.to_json();
    if (type == "remote") {
      json r;
      r["host"] = remote.host;
      r["port"] = remote.port;
      r["path"] = remote.path;
      j["remote"] = std::move(r);
    }
    return j;
  }

  static ScorerSelection from_json(const json& j) {
    ScorerSelection s;
    s.type = j.value("type", "stub");
    if (s.type == "stub") {
      if (auto it = j.find("stub_probs"); it != j.end()) {
        s.stub_probs = it->get<std::array<double, 3>>();
      }
    } else if (s.type == "replay") {
      s.replay_path = j.value("replay_path", "");
    } else if (s.type == "simulated") {
      if (auto it = j.find("simulated"); it != j.end()) {
        s.simulated = SimulatedScorerSpec::from_json(*it);
      }
    } else if (s.type == "remote") {
      if (auto it = j.find("remote"); it != j.end()) {
        s.remote.host = it->value("host", "");
        s.remote.port = it->value("port", 80);
        s.remote.path = it->value("path", "/score");
        s.remote.timeout_ms = it->value("timeout_ms", s.remote.timeout_ms);
      }
    } else {
      throw ConfigError("unknown scorer type: " + s.type);
    }
    return s;
  }
};

struct CalibrationSettings {
  std::string policy_mode = "msp+vet";  // deferral mode written to the policies file
  std::string metric = "msp";           // threshold sweep metric
  double grid_step = 0.01;
  double vet_cutoff = 0.8;
  int mc_passes = 20;
  bool oracle_corrections = false;

  json to_json() const {
    json j;
    j["policy_mode"] = policy_mode;
    j["metric"] = metric;
    j["grid_step"] = grid_step;
    j["vet_cutoff"] = vet_cutoff;
    j["mc_passes"] = mc_passes;
    j["oracle_corrections"] = oracle_corrections;
    return j;
  }

  static CalibrationSettings from_json(const json& j) {
    CalibrationSettings s;
    s.policy_mode = j.value("policy_mode", s.policy_mode);
    s.metric = j.value("metric", s.metric);
    s.grid_step = j.value("grid_step", s.grid_step);
    s.vet_cutoff = j.value("vet_cutoff", s.vet_cutoff);
    s.mc_passes = j.value("mc_passes", s.mc_passes);
    s.oracle_corrections = j.value("oracle_corrections", s.oracle_corrections);
    return s;
  }
};

/// Everything a campaign command needs. Loaded from one JSON document;
/// ORACLE_TOKEN comes from the environment and command-line flags override
/// file values.
struct CampaignConfig {
  std::string name = "campaign";
  std::filesystem::path dataset_path;
  std::filesystem::path validation_path;
  std::filesystem::path policies_path;
  std::filesystem::path graph_path;
  std::filesystem::path overrides_path;
  std::filesystem::path out_dir = "out";
  std::vector<MythId> myths = default_myths();
  ScorerSelection scorer;
  std::string oracle_mode = "none";  // none | replay | http
  OracleConfig oracle;
  CalibrationSettings calibration;
  CostParams cost;
  std::uint64_t seed = 0;
  int workers = 1;

  json to_json() const {
    json j;
    j["name"] = name;
    j["dataset"] = dataset_path.string();
    j["validation"] = validation_path.string();
    j["policies"] = policies_path.string();
    j["graph"] = graph_path.string();
    j["overrides"] = overrides_path.string();
    j["out_dir"] = out_dir.string();
    json myths_json = json::array();
    for (const auto& m : myths) {
      json e;
      e["index"] = m.index();
      e["definition"] = m.definition();
      myths_json.push_back(std::move(e));
    }
    j["myths"] = std::move(myths_json);
    j["scorer"] = scorer.to_json();
    j["oracle_mode"] = oracle_mode;
    json o;
    o["host"] = oracle.host;
    o["port"] = oracle.port;
    o["label_path"] = oracle.label_path;
    o["judge_path"] = oracle.judge_path;
    o["replay_path"] = oracle.replay_path.string();
    o["shots"] = oracle.shots;
    o["temperature"] = oracle.temperature;
    o["max_attempts"] = oracle.max_attempts;
    o["backoff_initial_ms"] = oracle.backoff_initial_ms;
    o["max_inflight"] = oracle.max_inflight;
    j["oracle"] = std::move(o);
    j["calibration"] = calibration.to_json();
    j["cost"] = cost.to_json();
    j["seed"] = seed;
    j["workers"] = workers;
    return j;
  }

  static CampaignConfig from_json(const json& j) {
    CampaignConfig c;
    c.name = j.value("name", c.name);
    c.dataset_path = j.value("dataset", "");
    c.validation_path = j.value("validation", "");
    c.policies_path = j.value("policies", "");
    c.graph_path = j.value("graph", "");
    c.overrides_path = j.value("overrides", "");
    c.out_dir = j.value("out_dir", "out");
    if (auto it = j.find("myths"); it != j.end() && !it->is_null()) {
      c.myths.clear();
      for (const auto& m : *it) {
        c.myths.emplace_back(m.at("index").get<int>(),
                             m.at("definition").get<std::string>());
      }
      if (c.myths.empty()) throw ConfigError("myths list is empty");
    }
    if (auto it = j.find("scorer"); it != j.end()) {
      c.scorer = ScorerSelection::from_json(*it);
    }
    c.oracle_mode = j.value("oracle_mode", c.oracle_mode);
    if (c.oracle_mode != "none" && c.oracle_mode != "replay" &&
        c.oracle_mode != "http") {
      throw ConfigError("unknown oracle_mode: " + c.oracle_mode);
    }
    if (auto it = j.find("oracle"); it != j.end()) {
      const json& o = *it;
      c.oracle.host = o.value("host", "");
      c.oracle.port = o.value("port", 0);
      c.oracle.label_path = o.value("label_path", c.oracle.label_path);
      c.oracle.judge_path = o.value("judge_path", c.oracle.judge_path);
      c.oracle.replay_path = o.value("replay_path", "");
      c.oracle.shots = o.value("shots", c.oracle.shots);
      c.oracle.temperature = o.value("temperature", c.oracle.temperature);
      c.oracle.max_attempts = o.value("max_attempts", c.oracle.max_attempts);
      c.oracle.backoff_initial_ms =
          o.value("backoff_initial_ms", c.oracle.backoff_initial_ms);
      c.oracle.max_inflight = o.value("max_inflight", c.oracle.max_inflight);
      c.oracle.timeout_ms = o.value("timeout_ms", c.oracle.timeout_ms);
    }
    if (auto it = j.find("calibration"); it != j.end()) {
      c.calibration = CalibrationSettings::from_json(*it);
    }
    if (auto it = j.find("cost"); it != j.end()) {
      c.cost = CostParams::from_json(*it);
    }
    c.seed = j.value("seed", std::uint64_t{0});
    c.workers = j.value("workers", 1);
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    return c;
  }

  static CampaignConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    CampaignConfig c;
    try {
      c = from_json(j);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(e.what());
    }
    if (const char* token = std::getenv("ORACLE_TOKEN")) {
      c.oracle.token = token;
    }
    return c;
  }
};

/// Builds the configured scorer. Simulated scorers answer from the gold
/// labels of `gold_source`.
inline std::unique_ptr<Scorer> make_scorer(const ScorerSelection& sel,
                                           const Dataset& gold_source) {
  if (sel.type == "stub") {
    return std::make_unique<StubScorer>(
        ProbabilityVector::from_array(sel.stub_probs));
  }
  if (sel.type == "replay") {
    if (sel.replay_path.empty()) {
      throw ConfigError("replay scorer needs replay_path");
    }
    return std::make_unique<ReplayScorer>(sel.replay_path);
  }
  if (sel.type == "simulated") {
    return std::make_unique<SimulatedScorer>(sel.simulated, gold_source);
  }
  if (sel.type == "remote") {
    return std::make_unique<RemoteScorer>(sel.remote);
  }
  throw ConfigError("unknown scorer type: " + sel.type);
}

/// Builds the configured oracle client, or nothing for oracle_mode "none".
inline std::optional<OracleClient> make_oracle(const CampaignConfig& config) {
  if (config.oracle_mode == "none") return std::nullopt;
  OracleConfig cfg = config.oracle;
  if (config.oracle_mode == "replay") {
    if (cfg.replay_path.empty()) {
      throw ConfigError("oracle_mode replay needs oracle.replay_path");
    }
  } else {
    cfg.replay_path.clear();
    if (cfg.host.empty() || cfg.port <= 0) {
      throw ConfigError("oracle_mode http needs oracle.host and oracle.port");
    }
  }
  return OracleClient(cfg);
}

/// Policies file: {"policies": {"M1": {...}}, "default": {...}}. Myths not
/// listed fall back to the default policy when one is present.
inline std::map<int, DeferralPolicy> load_policies(
    const std::filesystem::path& path, const std::vector<MythId>& myths) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policies file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("policies file is not valid JSON: " + std::string(e.what()));
  }
  std::map<int, DeferralPolicy> out;
  std::optional<DeferralPolicy> fallback;
  if (auto it = j.find("default"); it != j.end() && !it->is_null()) {
    fallback = DeferralPolicy::from_json(*it);
  }
  if (auto it = j.find("policies"); it != j.end() && !it->is_null()) {
    for (const auto& [key, value] : it->items()) {
      out[myth_index_from_key(key)] = DeferralPolicy::from_json(value);
    }
  }
  for (const auto& myth : myths) {
    if (out.count(myth.index()) == 0) {
      if (!fallback) {
        throw ConfigError("no policy for " + myth.key() +
                          " and no default policy");
      }
      out[myth.index()] = *fallback;
    }
  }
  return out;
}

inline void save_policies(const std::map<int, DeferralPolicy>& policies,
                          const std::filesystem::path& path) {
  json j;
  json inner;
  for (const auto& [myth, policy] : policies) {
    inner[myth_key(myth)] = policy.to_json();
  }
  j["policies"] = std::move(inner);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policies file: " + path.string());
  out << j.dump(2) << '\n';
}

/// Overrides file: {"video_id": -1|0|1, ...}.
inline std::map<std::string, StanceLabel> load_overrides(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open overrides file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("overrides file is not valid JSON: " +
                      std::string(e.what()));
  }
  std::map<std::string, StanceLabel> out;
  for (const auto& [key, value] : j.items()) {
    out[key] = stance_from_int(value.get<int>());
  }
  return out;
}

}  // namespace triage
