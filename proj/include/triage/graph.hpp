#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "triage/errors.hpp"
#include "triage/json.hpp"

namespace triage {

/// One recommendation edge: at `level` of the crawl, `target` was the
/// `rank`-th recommendation shown on `source`.
struct RecommendationEdge {
  std::string source;
  std::string target;
  int level = 1;  // 1..5
  int rank = 1;   // 1..4

  friend bool operator==(const RecommendationEdge&,
                         const RecommendationEdge&) = default;
};

/// Edge list of a cascaded recommendation crawl. Level-1 sources form the
/// seed set; any deeper source must have been reached as a target one level
/// above.
class RecommendationGraph {
 public:
  static constexpr int kMaxLevel = 5;
  static constexpr int kMaxRank = 4;

  void add_edge(RecommendationEdge edge) {
    if (edge.source.empty() || edge.target.empty()) {
      throw InvalidGraph("edge endpoints must be non-empty");
    }
    if (edge.level < 1 || edge.level > kMaxLevel) {
      throw InvalidGraph("edge level out of range: " + std::to_string(edge.level));
    }
    if (edge.rank < 1 || edge.rank > kMaxRank) {
      throw InvalidGraph("edge rank out of range: " + std::to_string(edge.rank));
    }
    edges_.push_back(std::move(edge));
  }

  const std::vector<RecommendationEdge>& edges() const { return edges_; }
  bool empty() const { return edges_.empty(); }

  std::set<std::string> nodes() const {
    std::set<std::string> out;
    for (const auto& e : edges_) {
      out.insert(e.source);
      out.insert(e.target);
    }
    return out;
  }

  int max_level() const {
    int m = 0;
    for (const auto& e : edges_) {
      if (e.level > m) m = e.level;
    }
    return m;
  }

  /// Every edge source above level 1 must appear as a target at the previous
  /// level. Throws InvalidGraph on the first violation.
  void validate_lineage() const {
    std::map<int, std::set<std::string>> targets_by_level;
    for (const auto& e : edges_) targets_by_level[e.level].insert(e.target);
    for (const auto& e : edges_) {
      if (e.level == 1) continue;
      auto it = targets_by_level.find(e.level - 1);
      if (it == targets_by_level.end() || it->second.count(e.source) == 0) {
        throw InvalidGraph("source " + e.source + " at level " +
                           std::to_string(e.level) +
                           " was never a target at level " +
                           std::to_string(e.level - 1));
      }
    }
  }

 private:
  std::vector<RecommendationEdge> edges_;
};

inline RecommendationEdge edge_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("edge line is not a JSON object");
  RecommendationEdge e;
  for (const char* field : {"source", "target", "level", "rank"}) {
    if (!j.contains(field)) throw MissingField(field);
  }
  if (!j["source"].is_string() || !j["target"].is_string()) {
    throw InvalidArgument("edge endpoints must be strings");
  }
  if (!j["level"].is_number_integer() || !j["rank"].is_number_integer()) {
    throw InvalidArgument("edge level/rank must be integers");
  }
  e.source = j["source"].get<std::string>();
  e.target = j["target"].get<std::string>();
  e.level = j["level"].get<int>();
  e.rank = j["rank"].get<int>();
  return e;
}

inline json edge_to_json(const RecommendationEdge& e) {
  json j;
  j["source"] = e.source;
  j["target"] = e.target;
  j["level"] = e.level;
  j["rank"] = e.rank;
  return j;
}

/// Loads an edge list (one JSON object per edge) and validates lineage.
inline RecommendationGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path.string());
  RecommendationGraph g;
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
    try {
      g.add_edge(edge_from_json(j));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  g.validate_lineage();
  return g;
}

inline void save_graph(const RecommendationGraph& g,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file: " + path.string());
  for (const auto& e : g.edges()) out << edge_to_json(e).dump() << '\n';
}

}  // namespace triage
