#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "triage/errors.hpp"
#include "triage/json.hpp"

namespace triage {

/// Unit costs for the three labeling plans. Defaults are the published rates
/// this model was validated against: minimum-wage expert time, per-token API
/// pricing, per-call energy draw, and GPU rental for the local model.
struct CostParams {
  double expert_minutes_per_item = 3.0;
  double expert_hourly_wage = 7.25;

  double oracle_seconds_per_call = 3.4;
  double oracle_input_tokens = 6066.92;   // average per call
  double oracle_output_tokens = 144.01;   // average per call
  double price_per_1m_input = 2.50;
  double price_per_1m_output = 10.00;
  double oracle_wh_per_call = 3.0;

  double grid_kg_co2_per_kwh = 0.374;

  double gpu_hourly_rate = 0.46;
  double gpu_watts = 300.0;
  double local_train_hours = 216.0;
  double local_infer_hours = 16.72;

  /// The oracle's per-call price is quantized to this many decimals before
  /// multiplying by call counts, mirroring how API price sheets quote a
  /// rounded per-call figure. Negative disables quantization.
  int per_call_price_decimals = 4;

  void validate() const {
    for (double v :
         {expert_minutes_per_item, expert_hourly_wage, oracle_seconds_per_call,
          oracle_input_tokens, oracle_output_tokens, price_per_1m_input,
          price_per_1m_output, oracle_wh_per_call, grid_kg_co2_per_kwh,
          gpu_hourly_rate, gpu_watts, local_train_hours, local_infer_hours}) {
      if (v < 0 || !std::isfinite(v)) {
        throw InvalidArgument("cost parameters must be non-negative");
      }
    }
  }

  json to_json() const {
    json j;
    j["expert_minutes_per_item"] = expert_minutes_per_item;
    j["expert_hourly_wage"] = expert_hourly_wage;
    j["oracle_seconds_per_call"] = oracle_seconds_per_call;
    j["oracle_input_tokens"] = oracle_input_tokens;
    j["oracle_output_tokens"] = oracle_output_tokens;
    j["price_per_1m_input"] = price_per_1m_input;
    j["price_per_1m_output"] = price_per_1m_output;
    j["oracle_wh_per_call"] = oracle_wh_per_call;
    j["grid_kg_co2_per_kwh"] = grid_kg_co2_per_kwh;
    j["gpu_hourly_rate"] = gpu_hourly_rate;
    j["gpu_watts"] = gpu_watts;
    j["local_train_hours"] = local_train_hours;
    j["local_infer_hours"] = local_infer_hours;
    j["per_call_price_decimals"] = per_call_price_decimals;
    return j;
  }

  static CostParams from_json(const json& j) {
    CostParams p;
    p.expert_minutes_per_item =
        j.value("expert_minutes_per_item", p.expert_minutes_per_item);
    p.expert_hourly_wage = j.value("expert_hourly_wage", p.expert_hourly_wage);
    p.oracle_seconds_per_call =
        j.value("oracle_seconds_per_call", p.oracle_seconds_per_call);
    p.oracle_input_tokens = j.value("oracle_input_tokens", p.oracle_input_tokens);
    p.oracle_output_tokens =
        j.value("oracle_output_tokens", p.oracle_output_tokens);
    p.price_per_1m_input = j.value("price_per_1m_input", p.price_per_1m_input);
    p.price_per_1m_output = j.value("price_per_1m_output", p.price_per_1m_output);
    p.oracle_wh_per_call = j.value("oracle_wh_per_call", p.oracle_wh_per_call);
    p.grid_kg_co2_per_kwh =
        j.value("grid_kg_co2_per_kwh", p.grid_kg_co2_per_kwh);
    p.gpu_hourly_rate = j.value("gpu_hourly_rate", p.gpu_hourly_rate);
    p.gpu_watts = j.value("gpu_watts", p.gpu_watts);
    p.local_train_hours = j.value("local_train_hours", p.local_train_hours);
    p.local_infer_hours = j.value("local_infer_hours", p.local_infer_hours);
    p.per_call_price_decimals =
        j.value("per_call_price_decimals", p.per_call_price_decimals);
    p.validate();
    return p;
  }
};

/// Oracle price per call, quantized per params.
inline double per_call_price(const CostParams& p) {
  double price = p.oracle_input_tokens * p.price_per_1m_input / 1e6 +
                 p.oracle_output_tokens * p.price_per_1m_output / 1e6;
  if (p.per_call_price_decimals >= 0) {
    const double scale = std::pow(10.0, p.per_call_price_decimals);
    price = std::round(price * scale) / scale;
  }
  return price;
}

struct CostComponent {
  std::string name;
  double hours = 0;
  double money = 0;
  double kwh = 0;
};

/// Totals for one labeling plan. Totals always equal the sum of the
/// breakdown; kg_co2 is derived from total energy.
struct CostReport {
  std::string plan;
  double hours = 0;
  double money = 0;
  double kwh = 0;
  double kg_co2 = 0;
  std::vector<CostComponent> breakdown;
  std::vector<std::string> notes;

  json to_json() const {
    json j;
    j["plan"] = plan;
    j["hours"] = hours;
    j["money"] = money;
    j["kwh"] = kwh;
    j["kg_co2"] = kg_co2;
    json parts = json::array();
    for (const auto& c : breakdown) {
      json e;
      e["name"] = c.name;
      e["hours"] = c.hours;
      e["money"] = c.money;
      e["kwh"] = c.kwh;
      parts.push_back(std::move(e));
    }
    j["breakdown"] = std::move(parts);
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }
};

namespace detail {

inline void finalize_report(CostReport& report, double co2_factor) {
  report.hours = 0;
  report.money = 0;
  report.kwh = 0;
  for (const auto& c : report.breakdown) {
    report.hours += c.hours;
    report.money += c.money;
    report.kwh += c.kwh;
  }
  report.kg_co2 = report.kwh * co2_factor;
}

}  // namespace detail

/// A human expert labeling every item, all myths per sitting.
inline CostReport expert_plan(std::int64_t n_items, std::int64_t n_myths,
                              const CostParams& params = {}) {
  if (n_items < 0 || n_myths < 0) throw InvalidArgument("counts must be >= 0");
  params.validate();
  CostReport report;
  report.plan = "expert";
  CostComponent labeling;
  labeling.name = "expert labeling";
  labeling.hours =
      static_cast<double>(n_items) * params.expert_minutes_per_item / 60.0;
  labeling.money = labeling.hours * params.expert_hourly_wage;
  labeling.kwh = 0;  // expert energy use is not modeled
  report.breakdown.push_back(std::move(labeling));
  report.notes.push_back("expert energy and emissions are not modeled");
  detail::finalize_report(report, params.grid_kg_co2_per_kwh);
  return report;
}

/// Every (item, myth) pair labeled by the oracle.
inline CostReport oracle_plan(std::int64_t n_items, std::int64_t n_myths,
                              const CostParams& params = {}) {
  if (n_items < 0 || n_myths < 0) throw InvalidArgument("counts must be >= 0");
  params.validate();
  const double calls = static_cast<double>(n_items) * static_cast<double>(n_myths);
  CostReport report;
  report.plan = "oracle";
  CostComponent api;
  api.name = "oracle calls";
  api.hours = calls * params.oracle_seconds_per_call / 3600.0;
  api.money = calls * per_call_price(params);
  api.kwh = calls * params.oracle_wh_per_call / 1000.0;
  report.breakdown.push_back(std::move(api));
  detail::finalize_report(report, params.grid_kg_co2_per_kwh);
  return report;
}

/// Local model training and inference plus oracle calls for the deferred
/// pairs only.
inline CostReport cascade_plan(std::int64_t n_deferred,
                               const CostParams& params = {}) {
  if (n_deferred < 0) throw InvalidArgument("counts must be >= 0");
  params.validate();
  CostReport report;
  report.plan = "cascade";

  CostComponent train;
  train.name = "local training";
  train.hours = params.local_train_hours;
  train.money = train.hours * params.gpu_hourly_rate;
  train.kwh = train.hours * params.gpu_watts / 1000.0;
  report.breakdown.push_back(std::move(train));

  CostComponent infer;
  infer.name = "local inference";
  infer.hours = params.local_infer_hours;
  infer.money = infer.hours * params.gpu_hourly_rate;
  infer.kwh = infer.hours * params.gpu_watts / 1000.0;
  report.breakdown.push_back(std::move(infer));

  CostComponent deferrals;
  deferrals.name = "oracle deferrals";
  const double calls = static_cast<double>(n_deferred);
  deferrals.hours = calls * params.oracle_seconds_per_call / 3600.0;
  deferrals.money = calls * per_call_price(params);
  deferrals.kwh = calls * params.oracle_wh_per_call / 1000.0;
  report.breakdown.push_back(std::move(deferrals));

  detail::finalize_report(report, params.grid_kg_co2_per_kwh);
  return report;
}

/// Savings of plan `a` relative to baseline `b`, per dimension: 1 - a/b.
/// A cell is empty when the baseline dimension is zero.
struct SavingsCell {
  std::optional<double> hours;
  std::optional<double> money;
  std::optional<double> kwh;
  std::optional<double> kg_co2;
};

class SavingsTable {
 public:
  SavingsTable(std::vector<std::string> names, std::vector<SavingsCell> cells)
      : names_(std::move(names)), cells_(std::move(cells)) {}

  const std::vector<std::string>& plans() const { return names_; }

  const SavingsCell& cell(std::size_t plan, std::size_t baseline) const {
    return cells_.at(plan * names_.size() + baseline);
  }

  /// Strict accessor; throws DivisionByZero for undefined cells.
  double savings(std::size_t plan, std::size_t baseline,
                 const char* dimension) const {
    const SavingsCell& c = cell(plan, baseline);
    std::optional<double> v;
    const std::string dim = dimension;
    if (dim == "hours") {
      v = c.hours;
    } else if (dim == "money") {
      v = c.money;
    } else if (dim == "kwh") {
      v = c.kwh;
    } else if (dim == "kg_co2") {
      v = c.kg_co2;
    } else {
      throw InvalidArgument("unknown savings dimension: " + dim);
    }
    if (!v) {
      throw DivisionByZero("baseline " + names_.at(baseline) + " has zero " +
                           dim);
    }
    return *v;
  }

  json to_json() const {
    json j;
    j["plans"] = names_;
    json rows = json::array();
    for (std::size_t a = 0; a < names_.size(); ++a) {
      for (std::size_t b = 0; b < names_.size(); ++b) {
        if (a == b) continue;
        const SavingsCell& c = cell(a, b);
        json e;
        e["plan"] = names_[a];
        e["baseline"] = names_[b];
        e["hours"] = c.hours ? json(*c.hours) : json(nullptr);
        e["money"] = c.money ? json(*c.money) : json(nullptr);
        e["kwh"] = c.kwh ? json(*c.kwh) : json(nullptr);
        e["kg_co2"] = c.kg_co2 ? json(*c.kg_co2) : json(nullptr);
        rows.push_back(std::move(e));
      }
    }
    j["savings"] = std::move(rows);
    return j;
  }

 private:
  std::vector<std::string> names_;
  std::vector<SavingsCell> cells_;
};

/// Pairwise savings between plans: for each ordered pair (a, b), the table
/// holds 1 - a/b per dimension.
inline SavingsTable compare_plans(const std::vector<CostReport>& reports) {
  if (reports.size() < 2) {
    throw InvalidArgument("compare_plans needs at least two reports");
  }
  std::vector<std::string> names;
  names.reserve(reports.size());
  for (const auto& r : reports) names.push_back(r.plan);

  auto ratio = [](double a, double b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return 1.0 - a / b;
  };

  std::vector<SavingsCell> cells(reports.size() * reports.size());
  for (std::size_t a = 0; a < reports.size(); ++a) {
    for (std::size_t b = 0; b < reports.size(); ++b) {
      SavingsCell& c = cells[a * reports.size() + b];
      c.hours = ratio(reports[a].hours, reports[b].hours);
      c.money = ratio(reports[a].money, reports[b].money);
      c.kwh = ratio(reports[a].kwh, reports[b].kwh);
      c.kg_co2 = ratio(reports[a].kg_co2, reports[b].kg_co2);
    }
  }
  return SavingsTable(std::move(names), std::move(cells));
}

}  // namespace triage
