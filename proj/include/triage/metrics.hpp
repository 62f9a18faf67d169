#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"

namespace triage {

/// 3x3 confusion counts; rows are gold classes, columns predicted classes,
/// both in (Oppose, Neither, Support) order.
class ConfusionMatrix {
 public:
  static ConfusionMatrix from_labels(std::span<const StanceLabel> gold,
                                     std::span<const StanceLabel> pred) {
    if (gold.size() != pred.size()) {
      throw LengthMismatch("gold has " + std::to_string(gold.size()) +
                           " labels, predictions " + std::to_string(pred.size()));
    }
    if (gold.empty()) throw EmptyInput("no labels to evaluate");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], pred[i]);
    return cm;
  }

  void add(StanceLabel gold, StanceLabel pred, std::int64_t count = 1) {
    counts_[stance_index(gold)][stance_index(pred)] += count;
  }

  std::int64_t at(StanceLabel gold, StanceLabel pred) const {
    return counts_[stance_index(gold)][stance_index(pred)];
  }

  std::int64_t row_total(StanceLabel gold) const {
    std::int64_t t = 0;
    for (std::int64_t v : counts_[stance_index(gold)]) t += v;
    return t;
  }

  std::int64_t col_total(StanceLabel pred) const {
    std::int64_t t = 0;
    for (const auto& row : counts_) t += row[stance_index(pred)];
    return t;
  }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& row : counts_)
      for (std::int64_t v : row) t += v;
    return t;
  }

  std::int64_t diagonal() const {
    std::int64_t t = 0;
    for (std::size_t i = 0; i < 3; ++i) t += counts_[i][i];
    return t;
  }

  json to_json() const {
    json j;
    j["order"] = {"oppose", "neither", "support"};
    j["rows_gold_cols_pred"] = counts_;
    return j;
  }

  std::string format() const {
    std::ostringstream os;
    os << "gold \\ pred   oppose  neither  support\n";
    for (StanceLabel g : kStanceOrder) {
      os << stance_name(g);
      for (std::size_t pad = stance_name(g).size(); pad < 13; ++pad) os << ' ';
      for (StanceLabel p : kStanceOrder) {
        std::string v = std::to_string(at(g, p));
        for (std::size_t pad = v.size(); pad < 8; ++pad) os << ' ';
        os << v;
        os << ' ';
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  std::array<std::array<std::int64_t, 3>, 3> counts_{};
};

/// What to do with a class that has neither gold nor predicted instances.
enum class AbsentClassPolicy { Zero, Exclude, Strict };

struct PerClassStats {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;
  bool defined = false;  // class appears in gold or predictions
};

inline std::array<PerClassStats, 3> per_class_stats(const ConfusionMatrix& cm) {
  std::array<PerClassStats, 3> out;
  for (StanceLabel c : kStanceOrder) {
    PerClassStats& s = out[stance_index(c)];
    const std::int64_t tp = cm.at(c, c);
    const std::int64_t fp = cm.col_total(c) - tp;
    const std::int64_t fn = cm.row_total(c) - tp;
    s.support = cm.row_total(c);
    s.defined = tp + fp + fn > 0;
    if (!s.defined) continue;
    s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    // single-division form so equal (tp, fp, fn) always give bit-equal F1
    s.f1 = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
  }
  return out;
}

inline std::array<double, 3> per_class_f1(
    const ConfusionMatrix& cm, AbsentClassPolicy policy = AbsentClassPolicy::Zero) {
  auto stats = per_class_stats(cm);
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!stats[i].defined && policy == AbsentClassPolicy::Strict) {
      throw DegenerateData("class " +
                           std::string(stance_name(stance_at(i))) +
                           " has no gold or predicted instances");
    }
    out[i] = stats[i].defined ? stats[i].f1 : 0.0;
  }
  return out;
}

inline double macro_f1(const ConfusionMatrix& cm,
                       AbsentClassPolicy policy = AbsentClassPolicy::Zero) {
  auto stats = per_class_stats(cm);
  double sum = 0;
  int n = 0;
  for (const auto& s : stats) {
    if (!s.defined) {
      switch (policy) {
        case AbsentClassPolicy::Zero:
          ++n;  // contributes 0
          continue;
        case AbsentClassPolicy::Exclude:
          continue;
        case AbsentClassPolicy::Strict:
          throw DegenerateData("macro F1 undefined: class absent from data");
      }
    }
    sum += s.f1;
    ++n;
  }
  if (n == 0) throw DegenerateData("macro F1 undefined: no classes present");
  return sum / n;
}

inline double macro_f1(std::span<const StanceLabel> gold,
                       std::span<const StanceLabel> pred,
                       AbsentClassPolicy policy = AbsentClassPolicy::Zero) {
  return macro_f1(ConfusionMatrix::from_labels(gold, pred), policy);
}

inline double weighted_f1(const ConfusionMatrix& cm) {
  auto stats = per_class_stats(cm);
  double sum = 0;
  std::int64_t total = 0;
  for (const auto& s : stats) {
    sum += static_cast<double>(s.support) * s.f1;
    total += s.support;
  }
  if (total == 0) throw EmptyInput("weighted F1 undefined on empty gold");
  return sum / static_cast<double>(total);
}

inline double weighted_f1(std::span<const StanceLabel> gold,
                          std::span<const StanceLabel> pred) {
  return weighted_f1(ConfusionMatrix::from_labels(gold, pred));
}

inline double accuracy(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) throw EmptyInput("accuracy undefined on empty input");
  return static_cast<double>(cm.diagonal()) / static_cast<double>(total);
}

inline double accuracy(std::span<const StanceLabel> gold,
                       std::span<const StanceLabel> pred) {
  return accuracy(ConfusionMatrix::from_labels(gold, pred));
}

/// Sparse (item, annotator) -> label table; absent cells mean "not
/// annotated". Annotator counts may vary per item.
class AnnotationTable {
 public:
  void add(const std::string& item, const std::string& annotator,
           StanceLabel label) {
    auto [it, inserted] = items_[item].emplace(annotator, label);
    (void)it;
    if (!inserted) {
      throw InvalidArgument("duplicate annotation for (" + item + ", " +
                            annotator + ")");
    }
    ++size_;
  }

  const std::map<std::string, std::map<std::string, StanceLabel>>& items() const {
    return items_;
  }

  std::size_t size() const { return size_; }

 private:
  std::map<std::string, std::map<std::string, StanceLabel>> items_;
  std::size_t size_ = 0;
};

/// Krippendorff's alpha for nominal data, via the coincidence-matrix
/// formulation. Handles variable annotator counts and missing cells; items
/// with fewer than two annotations are excluded. Throws DegenerateData when
/// every pairable annotation carries one single value (expected disagreement
/// zero), and EmptyInput when no item has two or more annotations.
inline double krippendorff_alpha(const AnnotationTable& table) {
  std::array<std::array<double, 3>, 3> coincidence{};
  for (const auto& [item, cells] : table.items()) {
    const std::size_t m = cells.size();
    if (m < 2) continue;
    std::array<double, 3> value_counts{};
    for (const auto& [annotator, label] : cells) {
      value_counts[stance_index(label)] += 1;
    }
    const double denom = static_cast<double>(m) - 1;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t d = 0; d < 3; ++d) {
        const double pairs = c == d ? value_counts[c] * (value_counts[c] - 1)
                                    : value_counts[c] * value_counts[d];
        coincidence[c][d] += pairs / denom;
      }
    }
  }
  std::array<double, 3> margins{};
  double n = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t d = 0; d < 3; ++d) margins[c] += coincidence[c][d];
    n += margins[c];
  }
  if (n <= 0) throw EmptyInput("alpha needs an item with >= 2 annotations");
  double observed_disagreement = 0;
  double expected_pairs = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t d = 0; d < 3; ++d) {
      if (c == d) continue;
      observed_disagreement += coincidence[c][d];
      expected_pairs += margins[c] * margins[d];
    }
  }
  if (expected_pairs <= 0) {
    throw DegenerateData("alpha undefined: all annotations identical");
  }
  return 1.0 - (n - 1) * observed_disagreement / expected_pairs;
}

/// Cohen's kappa for two annotators with complete data.
inline double cohens_kappa(std::span<const StanceLabel> a,
                           std::span<const StanceLabel> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("annotator streams differ in length");
  }
  if (a.empty()) throw EmptyInput("kappa undefined on empty input");
  const double n = static_cast<double>(a.size());
  std::array<double, 3> count_a{};
  std::array<double, 3> count_b{};
  double agreement = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    count_a[stance_index(a[i])] += 1;
    count_b[stance_index(b[i])] += 1;
    if (a[i] == b[i]) agreement += 1;
  }
  const double p_o = agreement / n;
  double p_e = 0;
  for (std::size_t c = 0; c < 3; ++c) p_e += (count_a[c] / n) * (count_b[c] / n);
  if (1.0 - p_e <= 0) {
    throw DegenerateData("kappa undefined: expected agreement is 1");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace triage
