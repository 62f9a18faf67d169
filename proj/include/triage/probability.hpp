#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "triage/errors.hpp"
#include "triage/labels.hpp"

namespace triage {

/// A point on the 3-class probability simplex, indexed in (Oppose, Neither,
/// Support) order. Construction validates the simplex invariant.
class ProbabilityVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ProbabilityVector() : p_{1.0 / 3, 1.0 / 3, 1.0 / 3} {}

  ProbabilityVector(double oppose, double neither, double support)
      : p_{oppose, neither, support} {
    validate_();
  }

  static ProbabilityVector from_array(const std::array<double, 3>& p) {
    return ProbabilityVector(p[0], p[1], p[2]);
  }

  static ProbabilityVector one_hot(StanceLabel s) {
    std::array<double, 3> p{0, 0, 0};
    p[stance_index(s)] = 1.0;
    return from_array(p);
  }

  static ProbabilityVector uniform() { return ProbabilityVector(); }

  /// Rescales arbitrary non-negative weights to unit sum. Used after
  /// accumulating means to kill float drift.
  static ProbabilityVector normalized(const std::array<double, 3>& w) {
    double sum = w[0] + w[1] + w[2];
    if (!(sum > 0)) {
      throw InvalidArgument("cannot normalize a zero or negative mass vector");
    }
    for (double v : w) {
      if (v < 0 || !std::isfinite(v)) {
        throw InvalidArgument("cannot normalize: negative or non-finite component");
      }
    }
    return ProbabilityVector(w[0] / sum, w[1] / sum, w[2] / sum);
  }

  double at(StanceLabel s) const { return p_[stance_index(s)]; }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::array<double, 3>& data() const { return p_; }

  double max_prob() const {
    double m = p_[0];
    if (p_[1] > m) m = p_[1];
    if (p_[2] > m) m = p_[2];
    return m;
  }

  /// Argmax with deterministic tie-break: the lowest class index (Oppose
  /// first) wins.
  StanceLabel argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p_.size(); ++i) {
      if (p_[i] > p_[best]) best = i;
    }
    return stance_at(best);
  }

  friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b) {
    return a.p_ == b.p_;
  }

 private:
  void validate_() const {
    double sum = 0;
    for (double v : p_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InvalidArgument("probability component out of [0,1]: " +
                              std::to_string(v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw InvalidArgument("probabilities sum to " + std::to_string(sum) +
                            ", expected 1");
    }
  }

  std::array<double, 3> p_;
};

}  // namespace triage
