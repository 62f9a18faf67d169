#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "triage/deferral.hpp"
#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/oracle.hpp"
#include "triage/records.hpp"
#include "triage/rng.hpp"
#include "triage/scorers.hpp"

namespace triage {

/// Final label for one (video, myth) pair, with routing provenance.
struct FinalLabel {
  StanceLabel label = StanceLabel::Neither;
  PredictionSource source = PredictionSource::LocalScorer;
  ProbabilityVector local_probs;
  std::optional<DeferralReason> deferral_reason;  // set iff the policy deferred
  /// The policy deferred but the oracle failed after retries; the local label
  /// was kept and the pair needs review.
  bool fallback = false;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

struct TriageCounters {
  std::int64_t n_items = 0;
  std::int64_t n_predictions = 0;
  std::int64_t n_deferred = 0;    // policy-deferred pairs, resolved or not
  std::int64_t n_unresolved = 0;  // deferred pairs the oracle never answered
  std::int64_t oracle_input_tokens = 0;
  std::int64_t oracle_output_tokens = 0;
  double wall_seconds = 0;
};

inline json final_label_to_json(const std::string& video_id, int myth_index,
                                const FinalLabel& fl) {
  json j;
  j["video_id"] = video_id;
  j["myth"] = myth_key(myth_index);
  j["label"] = stance_to_int(fl.label);
  j["source"] = std::string(source_name(fl.source));
  j["probs"] = fl.local_probs.data();
  if (fl.deferral_reason) {
    j["deferral_reason"] = std::string(deferral_reason_name(*fl.deferral_reason));
  }
  if (fl.fallback) j["fallback"] = true;
  if (fl.input_tokens > 0) j["input_tokens"] = fl.input_tokens;
  if (fl.output_tokens > 0) j["output_tokens"] = fl.output_tokens;
  return j;
}

inline std::pair<LabelKey, FinalLabel> final_label_from_json(const json& j) {
  FinalLabel fl;
  fl.label = stance_from_int(j.at("label").get<int>());
  const std::string src = j.at("source").get<std::string>();
  if (src == "local") {
    fl.source = PredictionSource::LocalScorer;
  } else if (src == "oracle") {
    fl.source = PredictionSource::Oracle;
  } else {
    throw InvalidArgument("unknown label source: " + src);
  }
  const auto& probs = j.at("probs");
  fl.local_probs = ProbabilityVector(probs.at(0).get<double>(),
                                     probs.at(1).get<double>(),
                                     probs.at(2).get<double>());
  if (auto it = j.find("deferral_reason"); it != j.end() && !it->is_null()) {
    fl.deferral_reason = deferral_reason_from_name(it->get<std::string>());
  }
  fl.fallback = j.value("fallback", false);
  fl.input_tokens = j.value("input_tokens", std::int64_t{0});
  fl.output_tokens = j.value("output_tokens", std::int64_t{0});
  LabelKey key{j.at("video_id").get<std::string>(),
               myth_index_from_key(j.at("myth").get<std::string>())};
  return {std::move(key), std::move(fl)};
}

/// Outcome of a triage campaign: a keyed map of final labels plus accounting
/// counters. Immutable once built; serialization is sorted by key, so equal
/// results produce byte-identical labels files.
class TriageResult {
 public:
  using Map = std::map<LabelKey, FinalLabel>;

  TriageResult() = default;
  TriageResult(std::string fingerprint, Map per_item, TriageCounters counters)
      : fingerprint_(std::move(fingerprint)),
        per_item_(std::move(per_item)),
        counters_(counters) {}

  const Map& per_item() const { return per_item_; }
  const TriageCounters& counters() const { return counters_; }
  const std::string& fingerprint() const { return fingerprint_; }

  const FinalLabel& at(const std::string& video_id, int myth_index) const {
    return per_item_.at(LabelKey{video_id, myth_index});
  }

  /// One JSON object per (video_id, myth), sorted by key. Deterministic for a
  /// given result, independent of worker scheduling.
  std::string labels_jsonl() const {
    std::ostringstream os;
    for (const auto& [key, fl] : per_item_) {
      os << final_label_to_json(key.first, key.second, fl).dump() << '\n';
    }
    return os.str();
  }

  void write_labels(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write labels file: " + path.string());
    out << labels_jsonl();
  }

  json manifest() const {
    json j;
    j["fingerprint"] = fingerprint_;
    json c;
    c["n_items"] = counters_.n_items;
    c["n_predictions"] = counters_.n_predictions;
    c["n_deferred"] = counters_.n_deferred;
    c["n_unresolved"] = counters_.n_unresolved;
    c["oracle_input_tokens"] = counters_.oracle_input_tokens;
    c["oracle_output_tokens"] = counters_.oracle_output_tokens;
    c["wall_seconds"] = counters_.wall_seconds;
    j["counters"] = std::move(c);
    return j;
  }

  void write_manifest(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path.string());
    out << manifest().dump(2) << '\n';
  }

 private:
  std::string fingerprint_;
  Map per_item_;
  TriageCounters counters_;
};

/// Deferred fraction of a finished run.
inline double deferral_rate(std::int64_t n_deferred, std::int64_t n_predictions) {
  if (n_predictions <= 0) throw EmptyResult("no predictions to rate");
  return static_cast<double>(n_deferred) / static_cast<double>(n_predictions);
}

inline double deferral_rate(const TriageResult& result) {
  return deferral_rate(result.counters().n_deferred,
                       result.counters().n_predictions);
}

struct TriageConfig {
  int workers = 1;
  std::uint64_t seed = 0;
  /// Empty disables checkpointing.
  std::filesystem::path checkpoint_path;
  /// Flush the checkpoint stream every N completions.
  int checkpoint_flush = 500;
  /// Called after each completion with (done, total); return false to
  /// interrupt the run. The checkpoint is flushed before Interrupted is
  /// thrown, so the run can resume.
  std::function<bool(std::size_t, std::size_t)> progress;
};

/// Content hash covering everything that can change a campaign's output.
inline std::string campaign_fingerprint(const Dataset& dataset,
                                        const std::vector<MythId>& myths,
                                        const std::map<int, DeferralPolicy>& policies,
                                        const Scorer& scorer,
                                        const OracleClient* oracle,
                                        std::uint64_t seed) {
  std::uint64_t h = fnv1a64("campaign");
  h = fnv1a64(dataset.name(), h);
  for (const auto& rec : dataset) {
    h = fnv1a64(record_to_json(rec).dump(), h);
  }
  for (const auto& myth : myths) {
    h = fnv1a64_u64(static_cast<std::uint64_t>(myth.index()), h);
    h = fnv1a64(myth.definition(), h);
  }
  for (const auto& [index, policy] : policies) {
    h = fnv1a64_u64(static_cast<std::uint64_t>(index), h);
    h = fnv1a64(policy.to_json().dump(), h);
  }
  h = fnv1a64(scorer.fingerprint(), h);
  h = fnv1a64(oracle ? oracle->fingerprint() : "no-oracle", h);
  h = fnv1a64_u64(seed, h);
  return to_hex(h);
}

namespace detail {

struct CheckpointData {
  std::string fingerprint;
  TriageResult::Map completed;
};

inline std::optional<CheckpointData> read_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  CheckpointData data;
  try {
    json header = json::parse(line);
    data.fingerprint = header.at("fingerprint").get<std::string>();
  } catch (...) {
    throw FingerprintMismatch("checkpoint header unreadable: " + path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      data.completed.insert(final_label_from_json(json::parse(line)));
    } catch (...) {
      break;  // torn tail from an interrupted write; redo that pair
    }
  }
  return data;
}

}  // namespace detail

/// Runs the triage campaign: scores every (record, myth) pair locally,
/// applies the per-myth deferral policy, routes deferred pairs to the oracle,
/// and assembles a result with full provenance.
///
/// Oracle failures after retries do not abort the run: the pair keeps its
/// local label, is flagged `fallback`, and is counted in n_unresolved.
/// The result is a pure function of (dataset, myths, policies, scorer,
/// oracle fixtures, seed); worker count never changes it.
inline TriageResult run_triage(const Dataset& dataset,
                               const std::vector<MythId>& myths,
                               const Scorer& scorer, const OracleClient* oracle,
                               const std::map<int, DeferralPolicy>& policies,
                               const TriageConfig& config = {}) {
  const auto start_time = std::chrono::steady_clock::now();
  if (myths.empty()) throw ConfigError("no myths configured");
  for (const auto& myth : myths) {
    if (policies.count(myth.index()) == 0) {
      throw ConfigError("no deferral policy for " + myth.key());
    }
  }

  const std::string fingerprint =
      campaign_fingerprint(dataset, myths, policies, scorer, oracle, config.seed);

  TriageResult::Map completed;
  const bool checkpointing = !config.checkpoint_path.empty();
  if (checkpointing && std::filesystem::exists(config.checkpoint_path)) {
    auto data = detail::read_checkpoint(config.checkpoint_path);
    if (data) {
      if (data->fingerprint != fingerprint) {
        throw FingerprintMismatch(
            "checkpoint was written by a different campaign configuration");
      }
      completed = std::move(data->completed);
    }
  }

  struct Task {
    const VideoRecord* record;
    const MythId* myth;
  };
  std::vector<Task> tasks;
  for (const auto& rec : dataset) {
    for (const auto& myth : myths) {
      if (completed.count(LabelKey{rec.video_id, myth.index()}) == 0) {
        tasks.push_back(Task{&rec, &myth});
      }
    }
  }

  // The checkpoint is rewritten whole on open: header first, then every
  // already-completed pair. This drops any torn tail line left by an
  // interrupted write before new lines are appended after it.
  std::ofstream checkpoint_out;
  if (checkpointing && !tasks.empty()) {
    checkpoint_out.open(config.checkpoint_path, std::ios::trunc);
    if (!checkpoint_out) {
      throw ConfigError("cannot write checkpoint: " +
                        config.checkpoint_path.string());
    }
    json header;
    header["fingerprint"] = fingerprint;
    checkpoint_out << header.dump() << '\n';
    for (const auto& [key, fl] : completed) {
      checkpoint_out << final_label_to_json(key.first, key.second, fl).dump()
                     << '\n';
    }
    checkpoint_out << std::flush;
  }

  std::vector<std::optional<FinalLabel>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> stop{false};
  std::mutex io_mutex;
  std::exception_ptr failure;
  const std::size_t total = tasks.size() + completed.size();

  auto work = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      try {
        const DeferralPolicy& policy = policies.at(task.myth->index());
        ProbabilityVector probs;
        if (policy.mode == PolicyMode::MCDropout) {
          auto samples = scorer.score_stochastic(
              *task.record, *task.myth, policy.mc_passes,
              derive_seed(config.seed, "mc", task.record->video_id,
                          task.myth->index()));
          probs = mc_dropout_uncertainty(samples).mean;
        } else {
          probs = scorer.score(*task.record, *task.myth);
        }
        FinalLabel fl;
        fl.local_probs = probs;
        fl.label = probs.argmax();
        const DeferralOutcome outcome = policy.decide(probs);
        if (outcome.decision == Decision::Defer) {
          fl.deferral_reason = outcome.reason;
          try {
            if (oracle == nullptr) {
              throw OracleUnreachable("no oracle configured");
            }
            const OracleVerdict verdict = oracle->label(*task.record, *task.myth);
            fl.label = verdict.label;
            fl.source = PredictionSource::Oracle;
            fl.input_tokens = verdict.input_tokens;
            fl.output_tokens = verdict.output_tokens;
          } catch (const Error&) {
            fl.fallback = true;  // keep the local label, flag for review
          }
        }
        slots[i] = std::move(fl);
        const std::size_t finished = done.fetch_add(1) + 1;
        {
          std::lock_guard<std::mutex> lock(io_mutex);
          if (checkpoint_out.is_open()) {
            checkpoint_out << final_label_to_json(task.record->video_id,
                                                  task.myth->index(), *slots[i])
                                  .dump()
                           << '\n';
            if (config.checkpoint_flush > 0 &&
                finished % static_cast<std::size_t>(config.checkpoint_flush) == 0) {
              checkpoint_out.flush();
            }
          }
          if (config.progress &&
              !config.progress(finished + completed.size(), total)) {
            stop.store(true, std::memory_order_relaxed);
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  const int worker_count =
      std::max(1, std::min<int>(config.workers, static_cast<int>(tasks.size())));
  if (worker_count <= 1 || tasks.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (checkpoint_out.is_open()) checkpoint_out.flush();
  if (failure) std::rethrow_exception(failure);
  if (stop.load() && done.load() < tasks.size()) {
    throw Interrupted("triage run interrupted after " +
                      std::to_string(done.load() + completed.size()) + " of " +
                      std::to_string(total) + " pairs");
  }

  TriageResult::Map per_item = std::move(completed);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    per_item.emplace(
        LabelKey{tasks[i].record->video_id, tasks[i].myth->index()},
        std::move(*slots[i]));
  }

  TriageCounters counters;
  counters.n_items = static_cast<std::int64_t>(dataset.size());
  counters.n_predictions = static_cast<std::int64_t>(per_item.size());
  for (const auto& [key, fl] : per_item) {
    if (fl.deferral_reason) ++counters.n_deferred;
    if (fl.fallback) ++counters.n_unresolved;
    counters.oracle_input_tokens += fl.input_tokens;
    counters.oracle_output_tokens += fl.output_tokens;
  }
  counters.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
          .count();
  return TriageResult(fingerprint, std::move(per_item), counters);
}

/// Loads a labels file back into a result map (for eval and analyze).
inline TriageResult::Map load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open labels file: " + path.string());
  TriageResult::Map out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto [key, fl] = final_label_from_json(json::parse(line));
      if (!out.emplace(std::move(key), std::move(fl)).second) {
        throw DuplicateId("duplicate label line");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace triage
