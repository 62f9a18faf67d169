#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/metrics.hpp"
#include "triage/probability.hpp"
#include "triage/scorers.hpp"

namespace triage {

enum class Decision { Retain, Defer };

enum class DeferralReason { MSP, VET, Both, Entropy };

inline constexpr std::string_view deferral_reason_name(DeferralReason r) {
  switch (r) {
    case DeferralReason::MSP:
      return "msp";
    case DeferralReason::VET:
      return "vet";
    case DeferralReason::Both:
      return "both";
    case DeferralReason::Entropy:
      return "entropy";
  }
  return "?";
}

inline DeferralReason deferral_reason_from_name(std::string_view name) {
  if (name == "msp") return DeferralReason::MSP;
  if (name == "vet") return DeferralReason::VET;
  if (name == "both") return DeferralReason::Both;
  if (name == "entropy") return DeferralReason::Entropy;
  throw InvalidArgument("unknown deferral reason: " + std::string(name));
}

/// Maximum softmax probability rule: defer when the predicted class'
/// probability falls below the threshold.
inline Decision msp_decide(const ProbabilityVector& probs, double tau) {
  if (tau < 0.0 || tau > 1.0) {
    throw InvalidArgument("MSP threshold must be in [0,1]");
  }
  return probs.max_prob() < tau ? Decision::Defer : Decision::Retain;
}

/// Validation-error-tendencies rule: defer predictions landing in classes
/// that performed poorly on the validation split.
inline Decision vet_decide(StanceLabel predicted,
                           const std::set<StanceLabel>& low_classes) {
  return low_classes.count(predicted) > 0 ? Decision::Defer : Decision::Retain;
}

/// Shannon entropy in nats, with 0*ln(0) = 0.
inline double entropy(const ProbabilityVector& probs) {
  double h = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = probs[i];
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

/// Upper end of the 3-class entropy range (ln 3), used to scale threshold
/// grids for entropy-based deferral.
inline double max_entropy() { return std::log(3.0); }

struct McUncertainty {
  ProbabilityVector mean;
  double entropy = 0;
};

/// Mean of stochastic forward passes (renormalized to kill float drift) and
/// the entropy of that mean.
inline McUncertainty mc_dropout_uncertainty(
    std::span<const ProbabilityVector> samples) {
  if (samples.empty()) throw EmptySamples("no stochastic samples");
  std::array<double, 3> sum{};
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < 3; ++i) sum[i] += s[i];
  }
  McUncertainty out;
  out.mean = ProbabilityVector::normalized(sum);
  out.entropy = entropy(out.mean);
  return out;
}

/// Classes whose per-class F1 (absent classes scoring 0) falls below the
/// cutoff. This is the raw selection rule; compute_vet_classes validates the
/// cutoff range on top of it.
inline std::set<StanceLabel> vet_classes_below(const std::array<double, 3>& f1,
                                               double cutoff) {
  std::set<StanceLabel> out;
  for (StanceLabel c : kStanceOrder) {
    if (f1[stance_index(c)] < cutoff) out.insert(c);
  }
  return out;
}

/// Low-performing classes on a validation split: per-class F1 below the
/// cutoff. Classes absent from both gold and predictions score 0 and are
/// therefore included.
inline std::set<StanceLabel> compute_vet_classes(
    std::span<const Prediction> val_preds, std::span<const StanceLabel> val_gold,
    double cutoff = 0.8) {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) {
    throw InvalidArgument("VET cutoff must be in (0,1]");
  }
  if (val_preds.size() != val_gold.size()) {
    throw LengthMismatch("validation predictions and gold differ in length");
  }
  if (val_preds.empty()) throw EmptyValidation("empty validation split");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < val_preds.size(); ++i) {
    cm.add(val_gold[i], val_preds[i].label);
  }
  return vet_classes_below(per_class_f1(cm, AbsentClassPolicy::Zero), cutoff);
}

enum class PolicyMode { MSP, VET, MSPplusVET, SoftmaxEntropy, MCDropout };

inline constexpr std::string_view policy_mode_name(PolicyMode m) {
  switch (m) {
    case PolicyMode::MSP:
      return "msp";
    case PolicyMode::VET:
      return "vet";
    case PolicyMode::MSPplusVET:
      return "msp+vet";
    case PolicyMode::SoftmaxEntropy:
      return "softmax_entropy";
    case PolicyMode::MCDropout:
      return "mc_dropout";
  }
  return "?";
}

inline PolicyMode policy_mode_from_name(std::string_view name) {
  if (name == "msp") return PolicyMode::MSP;
  if (name == "vet") return PolicyMode::VET;
  if (name == "msp+vet") return PolicyMode::MSPplusVET;
  if (name == "softmax_entropy") return PolicyMode::SoftmaxEntropy;
  if (name == "mc_dropout") return PolicyMode::MCDropout;
  throw InvalidArgument("unknown policy mode: " + std::string(name));
}

struct DeferralOutcome {
  Decision decision = Decision::Retain;
  std::optional<DeferralReason> reason;
};

/// Calibrated deferral configuration for one myth.
struct DeferralPolicy {
  PolicyMode mode = PolicyMode::MSP;
  double msp_threshold = 0.0;
  std::set<StanceLabel> vet_low_classes;
  double entropy_threshold = max_entropy();  // defer strictly above
  int mc_passes = 20;
  double vet_f1_cutoff = 0.8;

  /// Routing decision for one local prediction. For MCDropout, `probs` must
  /// be the mean of the stochastic passes.
  DeferralOutcome decide(const ProbabilityVector& probs) const {
    switch (mode) {
      case PolicyMode::MSP: {
        if (msp_decide(probs, msp_threshold) == Decision::Defer) {
          return {Decision::Defer, DeferralReason::MSP};
        }
        return {};
      }
      case PolicyMode::VET: {
        if (vet_decide(probs.argmax(), vet_low_classes) == Decision::Defer) {
          return {Decision::Defer, DeferralReason::VET};
        }
        return {};
      }
      case PolicyMode::MSPplusVET: {
        const bool m = msp_decide(probs, msp_threshold) == Decision::Defer;
        const bool v = vet_decide(probs.argmax(), vet_low_classes) == Decision::Defer;
        if (m && v) return {Decision::Defer, DeferralReason::Both};
        if (m) return {Decision::Defer, DeferralReason::MSP};
        if (v) return {Decision::Defer, DeferralReason::VET};
        return {};
      }
      case PolicyMode::SoftmaxEntropy:
      case PolicyMode::MCDropout: {
        if (entropy(probs) > entropy_threshold) {
          return {Decision::Defer, DeferralReason::Entropy};
        }
        return {};
      }
    }
    return {};
  }

  json to_json() const {
    json j;
    j["mode"] = std::string(policy_mode_name(mode));
    j["msp_threshold"] = msp_threshold;
    json low = json::array();
    for (StanceLabel c : kStanceOrder) {
      if (vet_low_classes.count(c)) low.push_back(stance_to_int(c));
    }
    j["vet_low_classes"] = low;
    j["entropy_threshold"] = entropy_threshold;
    j["mc_passes"] = mc_passes;
    j["vet_f1_cutoff"] = vet_f1_cutoff;
    return j;
  }

  static DeferralPolicy from_json(const json& j) {
    DeferralPolicy p;
    p.mode = policy_mode_from_name(j.value("mode", "msp"));
    p.msp_threshold = j.value("msp_threshold", 0.0);
    if (p.msp_threshold < 0 || p.msp_threshold > 1) {
      throw InvalidArgument("MSP threshold must be in [0,1]");
    }
    if (auto it = j.find("vet_low_classes"); it != j.end() && !it->is_null()) {
      for (const auto& v : *it) p.vet_low_classes.insert(stance_from_int(v.get<int>()));
    }
    p.entropy_threshold = j.value("entropy_threshold", max_entropy());
    p.mc_passes = j.value("mc_passes", 20);
    if (p.mc_passes < 1) throw InvalidArgument("mc_passes must be >= 1");
    p.vet_f1_cutoff = j.value("vet_f1_cutoff", 0.8);
    return p;
  }
};

/// Combined MSP-or-VET decision; Defer wins if either side defers.
inline Decision combined_decide(const ProbabilityVector& probs,
                                StanceLabel predicted,
                                const DeferralPolicy& policy) {
  if (msp_decide(probs, policy.msp_threshold) == Decision::Defer) {
    return Decision::Defer;
  }
  return vet_decide(predicted, policy.vet_low_classes);
}

enum class CalibrationMetric { MaxProb, SoftmaxEntropy, McEntropy };

inline constexpr std::string_view calibration_metric_name(CalibrationMetric m) {
  switch (m) {
    case CalibrationMetric::MaxProb:
      return "msp";
    case CalibrationMetric::SoftmaxEntropy:
      return "softmax_entropy";
    case CalibrationMetric::McEntropy:
      return "mc_entropy";
  }
  return "?";
}

inline CalibrationMetric calibration_metric_from_name(std::string_view name) {
  if (name == "msp") return CalibrationMetric::MaxProb;
  if (name == "softmax_entropy") return CalibrationMetric::SoftmaxEntropy;
  if (name == "mc_entropy") return CalibrationMetric::McEntropy;
  throw InvalidArgument("unknown calibration metric: " + std::string(name));
}

struct SweepPoint {
  double threshold = 0;
  double retained_macro_f1 = 0;
  double deferral_rate = 0;
};

struct CalibrationReport {
  std::string metric;
  double chosen_threshold = 0;
  double retained_macro_f1 = 0;
  double deferral_rate = 0;
  std::vector<SweepPoint> sweep;

  json to_json() const {
    json j;
    j["metric"] = metric;
    j["chosen_threshold"] = chosen_threshold;
    j["retained_macro_f1"] = retained_macro_f1;
    j["deferral_rate"] = deferral_rate;
    json sw = json::array();
    for (const auto& p : sweep) {
      json e;
      e["threshold"] = p.threshold;
      e["retained_macro_f1"] = p.retained_macro_f1;
      e["deferral_rate"] = p.deferral_rate;
      sw.push_back(std::move(e));
    }
    j["sweep"] = std::move(sw);
    return j;
  }
};

struct CalibrationOptions {
  /// Grid step as a fraction of the metric's range; 0.01 gives the 101-point
  /// sweep.
  double grid_step = 0.01;
  /// Upper end of the entropy threshold grid. 3-class entropy tops out at
  /// ln 3 nats, so the [0,1] grid is scaled by this; set to 1.0 for a literal
  /// unit-interval sweep, or ln 2 scaling for base-2 thresholds.
  double entropy_grid_max = max_entropy();
  /// Score thresholds by full-set F1 with deferred items answered from gold
  /// (a perfect-oracle cascade) instead of retained-set F1.
  bool oracle_corrections = false;
};

/// Exhaustive threshold sweep on a validation split. For each grid point the
/// deferred items are dropped and macro F1 is computed over the retained
/// ones, excluding classes absent from the retained subset; an empty retained
/// set scores 0. Ties break toward the lower deferral rate, then the lower
/// threshold.
inline CalibrationReport calibrate_threshold(
    std::span<const Prediction> val_preds, std::span<const StanceLabel> val_gold,
    CalibrationMetric metric, const CalibrationOptions& opts = {}) {
  if (val_preds.size() != val_gold.size()) {
    throw LengthMismatch("validation predictions and gold differ in length");
  }
  if (val_preds.empty()) throw EmptyValidation("empty validation split");
  if (!(opts.grid_step > 0 && opts.grid_step <= 1)) {
    throw InvalidArgument("grid step must be in (0,1]");
  }

  const std::size_t n = val_preds.size();
  const bool defer_above = metric != CalibrationMetric::MaxProb;
  if (defer_above && !(opts.entropy_grid_max > 0)) {
    throw InvalidArgument("entropy grid maximum must be positive");
  }
  const double scale = defer_above ? opts.entropy_grid_max : 1.0;
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    score[i] = defer_above ? entropy(val_preds[i].probs)
                           : val_preds[i].probs.max_prob();
  }

  const int steps = static_cast<int>(std::lround(1.0 / opts.grid_step));
  CalibrationReport report;
  report.metric = std::string(calibration_metric_name(metric));
  report.sweep.reserve(static_cast<std::size_t>(steps) + 1);

  std::vector<StanceLabel> kept_gold;
  std::vector<StanceLabel> kept_pred;
  kept_gold.reserve(n);
  kept_pred.reserve(n);
  bool have_best = false;
  SweepPoint best;

  for (int i = 0; i <= steps; ++i) {
    const double tau = scale * (static_cast<double>(i) / steps);
    kept_gold.clear();
    kept_pred.clear();
    std::size_t deferred = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool retain = defer_above ? score[k] <= tau : score[k] >= tau;
      if (retain) {
        kept_gold.push_back(val_gold[k]);
        kept_pred.push_back(val_preds[k].label);
      } else {
        ++deferred;
        if (opts.oracle_corrections) {
          kept_gold.push_back(val_gold[k]);
          kept_pred.push_back(val_gold[k]);
        }
      }
    }
    SweepPoint point;
    point.threshold = tau;
    point.deferral_rate = static_cast<double>(deferred) / static_cast<double>(n);
    point.retained_macro_f1 =
        kept_gold.empty()
            ? 0.0
            : macro_f1(kept_gold, kept_pred, AbsentClassPolicy::Exclude);
    report.sweep.push_back(point);

    if (!have_best || point.retained_macro_f1 > best.retained_macro_f1 ||
        (point.retained_macro_f1 == best.retained_macro_f1 &&
         point.deferral_rate < best.deferral_rate)) {
      best = point;
      have_best = true;
    }
  }

  report.chosen_threshold = best.threshold;
  report.retained_macro_f1 = best.retained_macro_f1;
  report.deferral_rate = best.deferral_rate;
  return report;
}

}  // namespace triage
