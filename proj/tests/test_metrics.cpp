#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "triage/triage.hpp"

using namespace triage;

namespace {

const std::vector<StanceLabel> kGold6{StanceLabel::Support, StanceLabel::Support,
                                      StanceLabel::Oppose,  StanceLabel::Oppose,
                                      StanceLabel::Neither, StanceLabel::Neither};
const std::vector<StanceLabel> kAllNeither6(6, StanceLabel::Neither);

}  // namespace

TEST_CASE("macro F1 on the all-neither 6-item case") {
  const auto f1 = per_class_f1(ConfusionMatrix::from_labels(kGold6, kAllNeither6));
  CHECK(f1[stance_index(StanceLabel::Oppose)] == 0.0);
  CHECK(f1[stance_index(StanceLabel::Neither)] == 0.5);
  CHECK(f1[stance_index(StanceLabel::Support)] == 0.0);
  CHECK(macro_f1(kGold6, kAllNeither6) == 1.0 / 6.0);
  CHECK(weighted_f1(kGold6, kAllNeither6) == 1.0 / 6.0);
  CHECK(accuracy(kGold6, kAllNeither6) == 2.0 / 6.0);
}

TEST_CASE("perfect predictions score one") {
  CHECK(macro_f1(kGold6, kGold6) == 1.0);
  CHECK(weighted_f1(kGold6, kGold6) == 1.0);
  CHECK(accuracy(kGold6, kGold6) == 1.0);
}

TEST_CASE("a total miss scores zero") {
  const std::vector<StanceLabel> gold{StanceLabel::Support};
  const std::vector<StanceLabel> pred{StanceLabel::Oppose};
  CHECK(macro_f1(gold, pred) == 0.0);
  CHECK(accuracy(gold, pred) == 0.0);
}

TEST_CASE("single-class gold predicted perfectly") {
  const std::vector<StanceLabel> gold(5, StanceLabel::Neither);
  CHECK(accuracy(gold, gold) == 1.0);
  CHECK(weighted_f1(gold, gold) == 1.0);
  // absent classes pull macro down under the zero policy, not the others
  CHECK(macro_f1(gold, gold) == 1.0 / 3.0);
  CHECK(macro_f1(ConfusionMatrix::from_labels(gold, gold),
                 AbsentClassPolicy::Exclude) == 1.0);
  CHECK_THROWS_AS(macro_f1(ConfusionMatrix::from_labels(gold, gold),
                           AbsentClassPolicy::Strict),
                  DegenerateData);
}

TEST_CASE("metric inputs are validated") {
  const std::vector<StanceLabel> gold{StanceLabel::Support};
  std::vector<StanceLabel> pred;
  CHECK_THROWS_AS(macro_f1(gold, pred), LengthMismatch);
  CHECK_THROWS_AS(macro_f1(pred, pred), EmptyInput);
}

TEST_CASE("macro F1 and accuracy are permutation invariant") {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(40));
    std::vector<StanceLabel> gold;
    std::vector<StanceLabel> pred;
    for (int i = 0; i < n; ++i) {
      gold.push_back(testsupport::random_stance(rng));
      pred.push_back(testsupport::random_stance(rng));
    }
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<StanceLabel> gold2;
    std::vector<StanceLabel> pred2;
    for (std::size_t i : order) {
      gold2.push_back(gold[i]);
      pred2.push_back(pred[i]);
    }
    CHECK(macro_f1(gold, pred) == macro_f1(gold2, pred2));
    CHECK(accuracy(gold, pred) == accuracy(gold2, pred2));
    CHECK(weighted_f1(gold, pred) == weighted_f1(gold2, pred2));
  }
}

TEST_CASE("metrics stay in range on random inputs") {
  Rng rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(30));
    std::vector<StanceLabel> gold;
    std::vector<StanceLabel> pred;
    for (int i = 0; i < n; ++i) {
      gold.push_back(testsupport::random_stance(rng));
      pred.push_back(testsupport::random_stance(rng));
    }
    const double m = macro_f1(gold, pred);
    const double w = weighted_f1(gold, pred);
    const double a = accuracy(gold, pred);
    CHECK((m >= 0.0 && m <= 1.0));
    CHECK((w >= 0.0 && w <= 1.0));
    CHECK((a >= 0.0 && a <= 1.0));
  }
}

namespace {

// Test-side alpha oracle: the per-item disagreement formulation written
// straight from the nominal-data formula, sharing nothing with the library's
// coincidence-matrix implementation.
double alpha_reference(const AnnotationTable& table) {
  double observed = 0;  // sum over items of pairwise disagreements / (m_i - 1)
  std::array<double, 3> margin{};
  double n = 0;
  for (const auto& [item, cells] : table.items()) {
    const std::size_t m = cells.size();
    if (m < 2) continue;
    std::array<double, 3> counts{};
    for (const auto& [annotator, label] : cells) {
      counts[stance_index(label)] += 1;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      margin[c] += counts[c];
      n += counts[c];
    }
    double disagreements = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t d = 0; d < 3; ++d) {
        if (c != d) disagreements += counts[c] * counts[d];
      }
    }
    observed += disagreements / (static_cast<double>(m) - 1);
  }
  double expected = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t d = 0; d < 3; ++d) {
      if (c != d) expected += margin[c] * margin[d];
    }
  }
  return 1.0 - (n - 1) * observed / expected;
}

AnnotationTable random_table(Rng& rng, int items, int annotators,
                             double fill = 0.7) {
  AnnotationTable table;
  for (int i = 0; i < items; ++i) {
    for (int a = 0; a < annotators; ++a) {
      if (rng.uniform01() < fill) {
        table.add("item" + std::to_string(i), "ann" + std::to_string(a),
                  testsupport::random_stance(rng));
      }
    }
  }
  return table;
}

}  // namespace

TEST_CASE("alpha is one under perfect agreement with label variety") {
  AnnotationTable table;
  table.add("i1", "a", StanceLabel::Support);
  table.add("i1", "b", StanceLabel::Support);
  table.add("i2", "a", StanceLabel::Oppose);
  table.add("i2", "b", StanceLabel::Oppose);
  table.add("i3", "a", StanceLabel::Neither);
  table.add("i3", "b", StanceLabel::Neither);
  CHECK(krippendorff_alpha(table) == 1.0);
}

TEST_CASE("alpha is undefined when every annotation is identical") {
  AnnotationTable table;
  table.add("i1", "a", StanceLabel::Support);
  table.add("i1", "b", StanceLabel::Support);
  table.add("i2", "a", StanceLabel::Support);
  table.add("i2", "b", StanceLabel::Support);
  CHECK_THROWS_AS(krippendorff_alpha(table), DegenerateData);
}

TEST_CASE("alpha needs at least one multi-annotated item") {
  AnnotationTable table;
  table.add("i1", "a", StanceLabel::Support);
  table.add("i2", "b", StanceLabel::Oppose);
  CHECK_THROWS_AS(krippendorff_alpha(table), EmptyInput);
}

TEST_CASE("alpha matches the reference formulation on a small mixed table") {
  AnnotationTable table;
  table.add("i1", "a", StanceLabel::Support);
  table.add("i1", "b", StanceLabel::Support);
  table.add("i2", "a", StanceLabel::Oppose);
  table.add("i2", "b", StanceLabel::Neither);
  table.add("i3", "a", StanceLabel::Neither);
  table.add("i3", "b", StanceLabel::Neither);
  table.add("i4", "a", StanceLabel::Support);
  table.add("i4", "b", StanceLabel::Oppose);
  const double mine = krippendorff_alpha(table);
  CHECK(mine == Catch::Approx(alpha_reference(table)).margin(1e-12));
  CHECK(mine < 1.0);
}

TEST_CASE("alpha handles variable annotator counts and missing cells") {
  Rng rng(71);
  int checked = 0;
  while (checked < 100) {
    const int items = 4 + static_cast<int>(rng.below(20));
    const int annotators = 2 + static_cast<int>(rng.below(5));
    AnnotationTable table = random_table(rng, items, annotators);
    try {
      const double mine = krippendorff_alpha(table);
      CHECK(mine == Catch::Approx(alpha_reference(table)).margin(1e-9));
      CHECK(mine <= 1.0 + 1e-12);
      ++checked;
    } catch (const Error&) {
      // degenerate draw; try another
    }
  }
}

TEST_CASE("alpha ignores annotator and item identities") {
  Rng rng(73);
  AnnotationTable table = random_table(rng, 12, 3, 0.9);
  AnnotationTable renamed;
  for (const auto& [item, cells] : table.items()) {
    for (const auto& [annotator, label] : cells) {
      renamed.add("x" + item + "y", "z" + annotator, label);
    }
  }
  CHECK(krippendorff_alpha(table) == krippendorff_alpha(renamed));
}

TEST_CASE("kappa of identical streams with variety is one") {
  const std::vector<StanceLabel> a{StanceLabel::Support, StanceLabel::Oppose,
                                   StanceLabel::Neither, StanceLabel::Support};
  CHECK(cohens_kappa(a, a) == 1.0);
}

TEST_CASE("kappa hand case: half agreement with square marginals is zero") {
  const std::vector<StanceLabel> a{StanceLabel::Support, StanceLabel::Support,
                                   StanceLabel::Neither, StanceLabel::Neither};
  const std::vector<StanceLabel> b{StanceLabel::Support, StanceLabel::Neither,
                                   StanceLabel::Support, StanceLabel::Neither};
  CHECK(cohens_kappa(a, b) == 0.0);
}

TEST_CASE("kappa of independent labelers hovers near zero") {
  Rng rng(79);
  std::vector<StanceLabel> a;
  std::vector<StanceLabel> b;
  for (int i = 0; i < 10000; ++i) {
    a.push_back(testsupport::random_stance(rng));
    b.push_back(testsupport::random_stance(rng));
  }
  CHECK(std::abs(cohens_kappa(a, b)) < 0.05);
}

TEST_CASE("kappa degenerates when expected agreement is one") {
  const std::vector<StanceLabel> a(4, StanceLabel::Support);
  CHECK_THROWS_AS(cohens_kappa(a, a), DegenerateData);
  std::vector<StanceLabel> b;
  CHECK_THROWS_AS(cohens_kappa(b, b), EmptyInput);
  const std::vector<StanceLabel> c{StanceLabel::Support};
  CHECK_THROWS_AS(cohens_kappa(a, c), LengthMismatch);
}

TEST_CASE("alpha and kappa agree for two complete annotators at large n") {
  Rng rng(83);
  std::vector<StanceLabel> a;
  std::vector<StanceLabel> b;
  AnnotationTable table;
  for (int i = 0; i < 1000; ++i) {
    // correlated draws so agreement is far from degenerate
    const StanceLabel base = testsupport::random_stance(rng);
    const StanceLabel other =
        rng.uniform01() < 0.7 ? base : testsupport::random_stance(rng);
    a.push_back(base);
    b.push_back(other);
    table.add("i" + std::to_string(i), "a", base);
    table.add("i" + std::to_string(i), "b", other);
  }
  CHECK(krippendorff_alpha(table) ==
        Catch::Approx(cohens_kappa(a, b)).margin(0.02));
}

TEST_CASE("confusion matrices count and format") {
  auto cm = ConfusionMatrix::from_labels(kGold6, kAllNeither6);
  CHECK(cm.total() == 6);
  CHECK(cm.at(StanceLabel::Support, StanceLabel::Neither) == 2);
  CHECK(cm.diagonal() == 2);
  const std::string text = cm.format();
  CHECK(text.find("gold \\ pred") != std::string::npos);
  const json j = cm.to_json();
  CHECK(j.at("rows_gold_cols_pred")[1][1] == 2);
}

TEST_CASE("annotation tables reject duplicate cells") {
  AnnotationTable table;
  table.add("i", "a", StanceLabel::Support);
  CHECK_THROWS_AS(table.add("i", "a", StanceLabel::Oppose), InvalidArgument);
}
