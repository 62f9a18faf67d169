#pragma once

// Shared helpers for the test suites.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "triage/triage.hpp"

namespace testsupport {

/// Unique directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("triage-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::filesystem::path file(const std::string& name) const {
    return path / name;
  }
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

inline triage::VideoRecord make_record(std::string id,
                                       std::string title = "a title") {
  triage::VideoRecord rec;
  rec.video_id = std::move(id);
  rec.title = std::move(title);
  rec.description = "a description";
  rec.transcript = "a transcript";
  rec.tags = {"one", "two"};
  return rec;
}

inline triage::StanceLabel random_stance(triage::Rng& rng) {
  return triage::stance_at(static_cast<std::size_t>(rng.below(3)));
}

/// Uniform point on the probability simplex.
inline triage::ProbabilityVector random_simplex(triage::Rng& rng) {
  std::array<double, 3> w;
  for (double& v : w) {
    double u = rng.uniform01();
    if (u >= 1.0) u = 0.999999;
    v = -std::log(1.0 - u);
  }
  return triage::ProbabilityVector::normalized(w);
}

/// Synthetic dataset with seeded random gold over the given myths.
inline triage::Dataset random_gold_dataset(int n, std::uint64_t seed,
                                           const std::vector<triage::MythId>& myths,
                                           const std::string& name = "synthetic") {
  triage::Dataset ds(name);
  triage::Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    triage::VideoRecord rec;
    rec.video_id = "v" + std::to_string(100000 + i);
    rec.title = "item " + std::to_string(i);
    for (const auto& myth : myths) {
      rec.gold[myth.index()] =
          triage::raw_label_from_int(triage::stance_to_int(random_stance(rng)));
    }
    ds.add(std::move(rec));
  }
  return ds;
}

/// Oracle fixture entry answering with a fixed label.
inline std::string oracle_entry(int label, std::int64_t input_tokens = 6067,
                                std::int64_t output_tokens = 144) {
  triage::json j;
  j["LABEL"] = label;
  j["EXCERPTS"] = triage::json::array({"an excerpt"});
  j["JUSTIFICATION"] = "replayed";
  j["usage"] = {{"input_tokens", input_tokens}, {"output_tokens", output_tokens}};
  return j.dump();
}

/// In-memory oracle fixture answering every (record, myth) with gold.
inline std::map<triage::LabelKey, std::string> gold_oracle_entries(
    const triage::Dataset& dataset, const std::vector<triage::MythId>& myths) {
  std::map<triage::LabelKey, std::string> out;
  for (const auto& rec : dataset) {
    for (const auto& myth : myths) {
      out[{rec.video_id, myth.index()}] =
          oracle_entry(triage::stance_to_int(rec.gold_stance(myth.index())));
    }
  }
  return out;
}

/// Judge fixture entries (myth_index 0) for every video: the consolidated
/// gold stance, with conflicts settled toward Oppose.
inline std::map<triage::LabelKey, std::string> judge_entries(
    const triage::Dataset& dataset) {
  std::map<triage::LabelKey, std::string> out;
  for (const auto& rec : dataset) {
    std::map<int, triage::StanceLabel> labels;
    for (const auto& [myth, raw] : rec.gold) {
      labels[myth] = triage::consolidate_raw_label(raw);
    }
    if (labels.empty()) continue;
    const auto overall = triage::consolidate_stance(labels);
    const int verdict = overall == triage::OverallStance::Conflict
                            ? -1
                            : static_cast<int>(overall);
    out[{rec.video_id, triage::OracleClient::kJudgeKey}] = oracle_entry(verdict);
  }
  return out;
}

/// Writes oracle fixture entries in the replay file format.
inline void write_oracle_fixture(
    const std::filesystem::path& path,
    const std::map<triage::LabelKey, std::string>& entries) {
  std::ofstream out(path);
  for (const auto& [key, body] : entries) {
    triage::json j = triage::json::parse(body);
    triage::json line;
    line["video_id"] = key.first;
    line["myth_index"] = key.second;
    for (const auto& [k, v] : j.items()) line[k] = v;
    out << line.dump() << '\n';
  }
}

}  // namespace testsupport
