#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "triage/errors.hpp"
#include "triage/graph.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/oracle.hpp"
#include "triage/records.hpp"
#include "triage/rng.hpp"

namespace triage {

/// A video's single stance across all myths. Conflict is an intermediate
/// state only; it must be resolved before any reporting.
enum class OverallStance : int { Oppose = -1, Neither = 0, Support = 1, Conflict = 2 };

inline constexpr std::string_view overall_stance_name(OverallStance s) {
  switch (s) {
    case OverallStance::Oppose:
      return "oppose";
    case OverallStance::Neither:
      return "neither";
    case OverallStance::Support:
      return "support";
    case OverallStance::Conflict:
      return "conflict";
  }
  return "?";
}

inline OverallStance overall_from_stance(StanceLabel s) {
  return static_cast<OverallStance>(stance_to_int(s));
}

inline StanceLabel stance_from_overall(OverallStance s) {
  if (s == OverallStance::Conflict) {
    throw InvalidArgument("conflict has no stance equivalent");
  }
  return static_cast<StanceLabel>(static_cast<int>(s));
}

/// Folds per-myth labels into one overall stance: any Support with no Oppose
/// is Support, any Oppose with no Support is Oppose, all-Neither is Neither,
/// and mixed Support+Oppose is Conflict.
inline OverallStance consolidate_stance(const std::map<int, StanceLabel>& labels) {
  if (labels.empty()) throw EmptyLabels("no myth labels to consolidate");
  bool has_support = false;
  bool has_oppose = false;
  for (const auto& [myth, label] : labels) {
    if (label == StanceLabel::Support) has_support = true;
    if (label == StanceLabel::Oppose) has_oppose = true;
  }
  if (has_support && has_oppose) return OverallStance::Conflict;
  if (has_support) return OverallStance::Support;
  if (has_oppose) return OverallStance::Oppose;
  return OverallStance::Neither;
}

enum class StanceProvenance { Heuristic, Override, Judge };

inline constexpr std::string_view stance_provenance_name(StanceProvenance p) {
  switch (p) {
    case StanceProvenance::Heuristic:
      return "heuristic";
    case StanceProvenance::Override:
      return "override";
    case StanceProvenance::Judge:
      return "judge";
  }
  return "?";
}

struct StanceResolution {
  OverallStance value = OverallStance::Neither;
  StanceProvenance provenance = StanceProvenance::Heuristic;
};

/// How to settle videos whose myth labels both support and oppose. Manual
/// overrides win over the judge oracle.
struct ConflictPolicy {
  std::map<std::string, StanceLabel> overrides;  // video_id -> resolved stance
  const OracleClient* judge = nullptr;
};

/// Overall stance with conflict escalation. Non-conflicting videos resolve by
/// the heuristic alone; conflicts go to the override table, then the judge.
inline StanceResolution resolve_overall_stance(const VideoRecord& record,
                                               const std::map<int, StanceLabel>& labels,
                                               const ConflictPolicy& policy = {}) {
  const OverallStance heuristic = consolidate_stance(labels);
  if (heuristic != OverallStance::Conflict) {
    return {heuristic, StanceProvenance::Heuristic};
  }
  if (auto it = policy.overrides.find(record.video_id);
      it != policy.overrides.end()) {
    return {overall_from_stance(it->second), StanceProvenance::Override};
  }
  if (policy.judge != nullptr) {
    const OracleVerdict verdict = policy.judge->judge_overall(record, labels);
    return {overall_from_stance(verdict.label), StanceProvenance::Judge};
  }
  throw UnresolvedConflict("video " + record.video_id +
                           " has both supporting and opposing labels and no "
                           "judge or override is configured");
}

/// Stance frequencies; counts or proportions both work, only ratios matter.
struct StanceDistribution {
  double support = 0;
  double oppose = 0;
  double neither = 0;
};

/// Myth bias in [-1, 1]: (s - o) / (s + n + o). +1 means everything supports
/// myths, -1 everything opposes them.
inline double bias_score(const StanceDistribution& d) {
  if (d.support < 0 || d.oppose < 0 || d.neither < 0) {
    throw InvalidArgument("stance frequencies must be >= 0");
  }
  const double total = d.support + d.oppose + d.neither;
  if (total <= 0) throw EmptyDistribution("no stances to score");
  return (d.support - d.oppose) / total;
}

enum class GroupBy { Myth, Topic, Filter, Overall };

inline constexpr std::string_view group_by_name(GroupBy g) {
  switch (g) {
    case GroupBy::Myth:
      return "myth";
    case GroupBy::Topic:
      return "topic";
    case GroupBy::Filter:
      return "filter";
    case GroupBy::Overall:
      return "overall";
  }
  return "?";
}

inline GroupBy group_by_from_name(std::string_view name) {
  if (name == "myth") return GroupBy::Myth;
  if (name == "topic") return GroupBy::Topic;
  if (name == "filter") return GroupBy::Filter;
  if (name == "overall") return GroupBy::Overall;
  throw UnknownGroupKey("unknown grouping: " + std::string(name));
}

struct DistributionRow {
  std::string key;
  /// Proportions over (Oppose, Neither, Support); sums to 1 per row.
  std::array<double, 3> proportions{};
  std::int64_t n = 0;
  double bias = 0;
};

struct DistributionTable {
  GroupBy group_by = GroupBy::Myth;
  std::vector<DistributionRow> rows;
  std::vector<std::string> notes;

  json to_json() const {
    json j;
    j["group_by"] = std::string(group_by_name(group_by));
    json rws = json::array();
    for (const auto& r : rows) {
      json e;
      e["key"] = r.key;
      e["oppose"] = r.proportions[0];
      e["neither"] = r.proportions[1];
      e["support"] = r.proportions[2];
      e["n"] = r.n;
      e["bias"] = r.bias;
      rws.push_back(std::move(e));
    }
    j["rows"] = std::move(rws);
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }

  std::string format() const {
    std::ostringstream os;
    os << "group=" << group_by_name(group_by) << '\n';
    os << "key            oppose  neither  support        n    bias\n";
    for (const auto& r : rows) {
      os << r.key;
      for (std::size_t pad = r.key.size(); pad < 12; ++pad) os << ' ';
      char buf[64];
      std::snprintf(buf, sizeof(buf), " %7.3f %8.3f %8.3f %8lld %7.3f",
                    r.proportions[0], r.proportions[1], r.proportions[2],
                    static_cast<long long>(r.n), r.bias);
      os << buf << '\n';
    }
    for (const auto& n : notes) os << "# " << n << '\n';
    return os.str();
  }
};

/// Per-video myth labels, as produced by a triage run.
using StanceMap = std::map<LabelKey, StanceLabel>;
/// Resolved overall stance per video (no Conflict entries).
using OverallMap = std::map<std::string, OverallStance>;

namespace detail {

inline DistributionRow make_row(std::string key,
                                const std::array<std::int64_t, 3>& counts) {
  DistributionRow row;
  row.key = std::move(key);
  row.n = counts[0] + counts[1] + counts[2];
  for (std::size_t i = 0; i < 3; ++i) {
    row.proportions[i] =
        static_cast<double>(counts[i]) / static_cast<double>(row.n);
  }
  StanceDistribution d;
  d.oppose = static_cast<double>(counts[0]);
  d.neither = static_cast<double>(counts[1]);
  d.support = static_cast<double>(counts[2]);
  row.bias = bias_score(d);
  return row;
}

inline std::size_t overall_index(OverallStance s) {
  if (s == OverallStance::Conflict) {
    throw InvalidArgument("unresolved conflict in overall stances");
  }
  return stance_index(stance_from_overall(s));
}

}  // namespace detail

/// Label proportions per group. Myth grouping uses the per-myth labels;
/// topic/filter/overall groupings use the per-video overall stances, with
/// videos missing the metadata field grouped under "(none)".
inline DistributionTable label_distribution(const Dataset& dataset,
                                            const StanceMap& labels,
                                            GroupBy group_by,
                                            const OverallMap* overall = nullptr) {
  DistributionTable table;
  table.group_by = group_by;

  if (group_by == GroupBy::Myth) {
    std::map<int, std::array<std::int64_t, 3>> counts;
    for (const auto& [key, label] : labels) {
      counts[key.second][stance_index(label)] += 1;
    }
    for (const auto& [myth, c] : counts) {
      table.rows.push_back(detail::make_row(myth_key(myth), c));
    }
    if (table.rows.empty()) table.notes.push_back("no labels; table is empty");
    return table;
  }

  if (overall == nullptr || overall->empty()) {
    table.notes.push_back("no overall stances; table is empty");
    return table;
  }

  if (group_by == GroupBy::Overall) {
    std::array<std::int64_t, 3> counts{};
    for (const auto& [video, stance] : *overall) {
      counts[detail::overall_index(stance)] += 1;
    }
    table.rows.push_back(detail::make_row("overall", counts));
    return table;
  }

  std::map<std::string, std::array<std::int64_t, 3>> counts;
  std::int64_t missing = 0;
  for (const auto& [video, stance] : *overall) {
    const VideoRecord* rec = dataset.find(video);
    if (rec == nullptr) {
      ++missing;
      continue;
    }
    const std::string& raw_key =
        group_by == GroupBy::Topic ? rec->topic : rec->filter;
    const std::string key = raw_key.empty() ? "(none)" : raw_key;
    counts[key][detail::overall_index(stance)] += 1;
  }
  for (const auto& [key, c] : counts) {
    table.rows.push_back(detail::make_row(key, c));
  }
  if (missing > 0) {
    table.notes.push_back(std::to_string(missing) +
                          " labeled videos missing from the dataset");
  }
  return table;
}

/// Per-level transition frequencies between source and target stances.
/// Edges with an endpoint of unknown stance land in explicit unknown buckets
/// and never dilute the populated rows.
class TransitionTable {
 public:
  struct LevelStats {
    std::array<std::array<std::int64_t, 3>, 3> counts{};  // src x dst
    std::array<std::int64_t, 3> unknown_target{};         // known src only
    std::int64_t unknown_source = 0;
  };

  std::map<int, LevelStats>& levels() { return levels_; }
  const std::map<int, LevelStats>& levels() const { return levels_; }
  bool empty() const { return levels_.empty(); }

  /// Row-normalized target frequencies, or nullopt for an empty row.
  std::optional<std::array<double, 3>> row(int level, StanceLabel src) const {
    auto it = levels_.find(level);
    if (it == levels_.end()) return std::nullopt;
    const auto& counts = it->second.counts[stance_index(src)];
    const std::int64_t total = counts[0] + counts[1] + counts[2];
    if (total == 0) return std::nullopt;
    std::array<double, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
      out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return out;
  }

  /// Frequency of src->dst transitions at a level; throws on empty rows.
  double rate(int level, StanceLabel src, StanceLabel dst) const {
    auto r = row(level, src);
    if (!r) {
      throw EmptyDistribution("no " + std::string(stance_name(src)) +
                              " sources at level " + std::to_string(level));
    }
    return (*r)[stance_index(dst)];
  }

  json to_json() const {
    json j = json::array();
    for (const auto& [level, stats] : levels_) {
      json e;
      e["level"] = level;
      json rows = json::array();
      for (StanceLabel src : kStanceOrder) {
        json r;
        r["source"] = std::string(stance_name(src));
        auto freq = row(level, src);
        r["populated"] = freq.has_value();
        if (freq) {
          r["oppose"] = (*freq)[0];
          r["neither"] = (*freq)[1];
          r["support"] = (*freq)[2];
        }
        r["unknown_targets"] = stats.unknown_target[stance_index(src)];
        rows.push_back(std::move(r));
      }
      e["rows"] = std::move(rows);
      e["unknown_sources"] = stats.unknown_source;
      j.push_back(std::move(e));
    }
    return j;
  }

  /// Flat per-(level, source, target) rates for external plotting.
  std::string edge_summary() const {
    std::ostringstream os;
    os << "level\tsource\ttarget\trate\tcount\n";
    for (const auto& [level, stats] : levels_) {
      for (StanceLabel src : kStanceOrder) {
        auto freq = row(level, src);
        if (!freq) continue;
        for (StanceLabel dst : kStanceOrder) {
          os << level << '\t' << stance_name(src) << '\t' << stance_name(dst)
             << '\t' << (*freq)[stance_index(dst)] << '\t'
             << stats.counts[stance_index(src)][stance_index(dst)] << '\n';
        }
      }
    }
    return os.str();
  }

  std::string format() const {
    std::ostringstream os;
    for (const auto& [level, stats] : levels_) {
      os << "level " << level << " (unknown sources: " << stats.unknown_source
         << ")\n";
      for (StanceLabel src : kStanceOrder) {
        os << "  " << stance_name(src) << " ->";
        auto freq = row(level, src);
        if (!freq) {
          os << " (no edges)\n";
          continue;
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      " oppose %.4f  neither %.4f  support %.4f", (*freq)[0],
                      (*freq)[1], (*freq)[2]);
        os << buf;
        if (stats.unknown_target[stance_index(src)] > 0) {
          os << "  (+" << stats.unknown_target[stance_index(src)]
             << " unknown targets)";
        }
        os << '\n';
      }
    }
    return os.str();
  }

 private:
  std::map<int, LevelStats> levels_;
};

/// Builds the per-level transition table from a recommendation graph and the
/// resolved overall stance of each video.
inline TransitionTable transition_analysis(const RecommendationGraph& graph,
                                           const OverallMap& stances) {
  TransitionTable table;
  auto stance_of = [&](const std::string& id) -> std::optional<std::size_t> {
    auto it = stances.find(id);
    if (it == stances.end()) return std::nullopt;
    return detail::overall_index(it->second);
  };
  for (const auto& edge : graph.edges()) {
    auto& stats = table.levels()[edge.level];
    const auto src = stance_of(edge.source);
    if (!src) {
      ++stats.unknown_source;
      continue;
    }
    const auto dst = stance_of(edge.target);
    if (!dst) {
      ++stats.unknown_target[*src];
      continue;
    }
    stats.counts[*src][*dst] += 1;
  }
  return table;
}

struct StratifiedSample {
  std::vector<std::string> ids;
  std::vector<std::string> notes;  // per-class shortfalls
};

/// Samples up to per_class video ids for each stance class of a preliminary
/// labeling, uniformly without replacement within class. Classes with fewer
/// members return all of them, with a shortfall note.
inline StratifiedSample stratified_sample(
    const Dataset& dataset, const std::map<std::string, StanceLabel>& prelim,
    int per_class, std::uint64_t seed) {
  if (per_class < 1) throw InvalidArgument("per_class must be >= 1");
  StratifiedSample out;
  for (StanceLabel cls : kStanceOrder) {
    std::vector<std::string> members;
    for (const auto& rec : dataset) {
      auto it = prelim.find(rec.video_id);
      if (it != prelim.end() && it->second == cls) {
        members.push_back(rec.video_id);
      }
    }
    Rng rng(derive_seed(seed, "stratified", stance_name(cls)));
    rng.shuffle(members);
    const std::size_t want = static_cast<std::size_t>(per_class);
    if (members.size() < want) {
      out.notes.push_back(std::string(stance_name(cls)) + ": only " +
                          std::to_string(members.size()) + " of " +
                          std::to_string(per_class) + " requested");
    }
    const std::size_t take = std::min(members.size(), want);
    out.ids.insert(out.ids.end(), members.begin(),
                   members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace triage
