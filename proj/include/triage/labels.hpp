#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triage/errors.hpp"

namespace triage {

/// Three-way stance of an item toward one myth.
enum class StanceLabel : int { Oppose = -1, Neither = 0, Support = 1 };

/// Canonical class order used for every 3-vector and matrix in the library.
inline constexpr std::array<StanceLabel, 3> kStanceOrder{
    StanceLabel::Oppose, StanceLabel::Neither, StanceLabel::Support};

inline constexpr int stance_to_int(StanceLabel s) { return static_cast<int>(s); }

inline StanceLabel stance_from_int(int v) {
  if (v < -1 || v > 1) {
    throw InvalidArgument("stance value out of range: " + std::to_string(v));
  }
  return static_cast<StanceLabel>(v);
}

/// Position of a stance in kStanceOrder (Oppose=0, Neither=1, Support=2).
inline constexpr std::size_t stance_index(StanceLabel s) {
  return static_cast<std::size_t>(static_cast<int>(s) + 1);
}

inline StanceLabel stance_at(std::size_t i) {
  if (i >= kStanceOrder.size()) {
    throw InvalidArgument("stance index out of range: " + std::to_string(i));
  }
  return kStanceOrder[i];
}

inline constexpr std::string_view stance_name(StanceLabel s) {
  switch (s) {
    case StanceLabel::Oppose:
      return "oppose";
    case StanceLabel::Neither:
      return "neither";
    case StanceLabel::Support:
      return "support";
  }
  return "?";
}

/// Raw 6-point annotation scale. Values carry the scale's numeric codes.
enum class RawLabel : int {
  Oppose = -1,
  Neutral = 0,
  Support = 1,
  Irrelevant = 2,
  Inaccessible = 3,
  NonEnglish = 4,
};

inline RawLabel raw_label_from_int(int v) {
  if (v < -1 || v > 4) {
    throw InvalidArgument("raw label out of range: " + std::to_string(v));
  }
  return static_cast<RawLabel>(v);
}

inline constexpr int raw_label_to_int(RawLabel r) { return static_cast<int>(r); }

/// Collapses the 6-point raw scale onto the 3-class stance scale. Neutral,
/// irrelevant, inaccessible and non-English items all map to Neither: none of
/// them take a side on a myth, and scoring unreadable items as Neither keeps
/// prevalence estimates conservative.
inline constexpr StanceLabel consolidate_raw_label(RawLabel r) {
  switch (r) {
    case RawLabel::Oppose:
      return StanceLabel::Oppose;
    case RawLabel::Support:
      return StanceLabel::Support;
    default:
      return StanceLabel::Neither;
  }
}

/// One myth in a campaign: a stable 1-based index plus the statement text
/// sent to oracles. The engine treats the statement as opaque.
class MythId {
 public:
  static constexpr int kMaxIndex = 8;

  MythId(int index, std::string definition)
      : index_(index), definition_(std::move(definition)) {
    if (index_ < 1 || index_ > kMaxIndex) {
      throw InvalidArgument("myth index out of range: " + std::to_string(index_));
    }
    if (definition_.empty()) {
      throw InvalidArgument("myth definition must be non-empty");
    }
  }

  int index() const { return index_; }
  const std::string& definition() const { return definition_; }

  /// Stable key used in file formats: "M1".."M8".
  std::string key() const { return "M" + std::to_string(index_); }

  friend bool operator==(const MythId& a, const MythId& b) {
    return a.index_ == b.index_;
  }

 private:
  int index_;
  std::string definition_;
};

inline std::string myth_key(int index) { return "M" + std::to_string(index); }

/// Parses "M3" -> 3. Throws on anything else.
inline int myth_index_from_key(std::string_view key) {
  if (key.size() < 2 || key[0] != 'M') {
    throw InvalidArgument("bad myth key: " + std::string(key));
  }
  int value = 0;
  for (std::size_t i = 1; i < key.size(); ++i) {
    if (key[i] < '0' || key[i] > '9') {
      throw InvalidArgument("bad myth key: " + std::string(key));
    }
    value = value * 10 + (key[i] - '0');
  }
  if (value < 1 || value > MythId::kMaxIndex) {
    throw InvalidArgument("myth index out of range in key: " + std::string(key));
  }
  return value;
}

/// Myths M1..Mcount with placeholder definitions, for campaigns that have not
/// attached real statements yet.
inline std::vector<MythId> default_myths(int count = MythId::kMaxIndex) {
  if (count < 1 || count > MythId::kMaxIndex) {
    throw InvalidArgument("myth count out of range: " + std::to_string(count));
  }
  std::vector<MythId> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) out.emplace_back(i, myth_key(i));
  return out;
}

/// Key of one prediction: (video_id, myth index).
using LabelKey = std::pair<std::string, int>;

}  // namespace triage
