// Command-line surface for triage campaigns: calibrate, run, eval, cost,
// analyze, simulate, plus a local fixture oracle server.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 oracle failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "triage/triage.hpp"

namespace fs = std::filesystem;
using triage::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitOracle = 4;

int exit_code_for(const triage::Error& e) {
  if (dynamic_cast<const triage::ConfigError*>(&e) != nullptr ||
      dynamic_cast<const triage::InvalidArgument*>(&e) != nullptr) {
    return kExitConfig;
  }
  if (dynamic_cast<const triage::OracleUnreachable*>(&e) != nullptr ||
      dynamic_cast<const triage::OracleBadLabel*>(&e) != nullptr ||
      dynamic_cast<const triage::OracleBadJson*>(&e) != nullptr) {
    return kExitOracle;
  }
  return kExitData;
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return triage::fnv1a64("missing:" + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return triage::fnv1a64(content);
}

fs::path make_run_dir(const fs::path& out_dir, const std::string& kind,
                      std::uint64_t fingerprint) {
  fs::path dir = out_dir / (kind + "-" + triage::to_hex(fingerprint));
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw triage::ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Shared flag bundle; empty values mean "not given, use the config file".
struct CommonFlags {
  std::string config_path;
  std::string dataset;
  std::string policies;
  std::string labels;
  std::string gold;
  std::string graph;
  std::string out;
  std::string replay;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> oracle_inflight;
};

triage::CampaignConfig load_config(const CommonFlags& flags) {
  triage::CampaignConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = triage::CampaignConfig::from_file(flags.config_path);
  } else if (const char* token = std::getenv("ORACLE_TOKEN")) {
    cfg.oracle.token = token;
  }
  if (!flags.dataset.empty()) cfg.dataset_path = flags.dataset;
  if (!flags.policies.empty()) cfg.policies_path = flags.policies;
  if (!flags.graph.empty()) cfg.graph_path = flags.graph;
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (!flags.replay.empty()) {
    cfg.oracle.replay_path = flags.replay;
    cfg.oracle_mode = "replay";
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.workers) cfg.workers = *flags.workers;
  if (flags.oracle_inflight) cfg.oracle.max_inflight = *flags.oracle_inflight;
  return cfg;
}

// Local predictions for one myth over the records that carry gold for it.
struct MythValidation {
  std::vector<triage::Prediction> preds;
  std::vector<triage::StanceLabel> gold;
};

MythValidation score_validation(const triage::Dataset& dataset,
                                const triage::Scorer& scorer,
                                const triage::MythId& myth, bool mc_mean,
                                int mc_passes, std::uint64_t seed) {
  MythValidation out;
  for (const auto& rec : dataset) {
    if (!rec.has_gold(myth.index())) continue;
    triage::ProbabilityVector probs;
    if (mc_mean) {
      auto samples = scorer.score_stochastic(
          rec, myth, mc_passes,
          triage::derive_seed(seed, "mc", rec.video_id, myth.index()));
      probs = triage::mc_dropout_uncertainty(samples).mean;
    } else {
      probs = scorer.score(rec, myth);
    }
    out.preds.push_back(triage::make_local_prediction(rec, myth, probs));
    out.gold.push_back(rec.gold_stance(myth.index()));
  }
  return out;
}

int cmd_calibrate(const CommonFlags& flags, double grid_step_override) {
  triage::CampaignConfig cfg = load_config(flags);
  fs::path val_path =
      cfg.validation_path.empty() ? cfg.dataset_path : cfg.validation_path;
  if (!flags.dataset.empty()) val_path = flags.dataset;
  if (val_path.empty()) {
    throw triage::ConfigError("calibrate needs a validation dataset");
  }
  triage::Dataset dataset = triage::load_dataset(val_path);
  if (dataset.empty()) throw triage::EmptyValidation("validation set is empty");

  auto scorer = triage::make_scorer(cfg.scorer, dataset);
  triage::CalibrationOptions opts;
  opts.grid_step = grid_step_override > 0 ? grid_step_override
                                          : cfg.calibration.grid_step;
  opts.oracle_corrections = cfg.calibration.oracle_corrections;
  const triage::PolicyMode mode =
      triage::policy_mode_from_name(cfg.calibration.policy_mode);
  const bool mc = mode == triage::PolicyMode::MCDropout;

  std::uint64_t fp = triage::fnv1a64("calibrate");
  fp = triage::fnv1a64(cfg.to_json().dump(), fp);
  fp = triage::fnv1a64_u64(file_hash(val_path), fp);
  const fs::path run_dir = make_run_dir(cfg.out_dir, "calibrate", fp);

  std::map<int, triage::DeferralPolicy> policies;
  for (const auto& myth : cfg.myths) {
    MythValidation val = score_validation(dataset, *scorer, myth, mc,
                                          cfg.calibration.mc_passes, cfg.seed);
    if (val.preds.empty()) {
      throw triage::EmptyValidation("no gold-labeled validation items for " +
                                    myth.key());
    }
    triage::DeferralPolicy policy;
    policy.mode = mode;
    policy.mc_passes = cfg.calibration.mc_passes;
    policy.vet_f1_cutoff = cfg.calibration.vet_cutoff;

    json report_json;
    report_json["myth"] = myth.key();
    report_json["n_validation"] = val.preds.size();

    if (mode == triage::PolicyMode::MSP || mode == triage::PolicyMode::MSPplusVET) {
      auto report = triage::calibrate_threshold(
          val.preds, val.gold, triage::CalibrationMetric::MaxProb, opts);
      policy.msp_threshold = report.chosen_threshold;
      report_json["calibration"] = report.to_json();
    } else if (mode == triage::PolicyMode::SoftmaxEntropy) {
      auto report = triage::calibrate_threshold(
          val.preds, val.gold, triage::CalibrationMetric::SoftmaxEntropy, opts);
      policy.entropy_threshold = report.chosen_threshold;
      report_json["calibration"] = report.to_json();
    } else if (mode == triage::PolicyMode::MCDropout) {
      auto report = triage::calibrate_threshold(
          val.preds, val.gold, triage::CalibrationMetric::McEntropy, opts);
      policy.entropy_threshold = report.chosen_threshold;
      report_json["calibration"] = report.to_json();
    }
    if (mode == triage::PolicyMode::VET || mode == triage::PolicyMode::MSPplusVET) {
      policy.vet_low_classes = triage::compute_vet_classes(
          val.preds, val.gold, cfg.calibration.vet_cutoff);
    }
    report_json["policy"] = policy.to_json();
    write_json(run_dir / ("calibration-" + myth.key() + ".json"), report_json);
    policies[myth.index()] = policy;
    std::cout << myth.key() << ": policy " << cfg.calibration.policy_mode;
    if (policy.mode != triage::PolicyMode::VET) {
      std::cout << ", threshold "
                << (policy.mode == triage::PolicyMode::MSP ||
                            policy.mode == triage::PolicyMode::MSPplusVET
                        ? policy.msp_threshold
                        : policy.entropy_threshold);
    }
    std::cout << ", VET classes " << policy.vet_low_classes.size() << '\n';
  }
  triage::save_policies(policies, run_dir / "policies.json");
  std::cout << "policies written to " << (run_dir / "policies.json").string()
            << '\n';
  return kExitOk;
}

int cmd_run(const CommonFlags& flags) {
  triage::CampaignConfig cfg = load_config(flags);
  if (cfg.dataset_path.empty()) throw triage::ConfigError("run needs --dataset");
  if (cfg.policies_path.empty()) {
    throw triage::ConfigError("run needs --policies");
  }
  triage::Dataset dataset = triage::load_dataset(cfg.dataset_path);
  auto policies = triage::load_policies(cfg.policies_path, cfg.myths);
  auto scorer = triage::make_scorer(cfg.scorer, dataset);
  auto oracle = triage::make_oracle(cfg);

  const std::string fingerprint = triage::campaign_fingerprint(
      dataset, cfg.myths, policies, *scorer, oracle ? &*oracle : nullptr,
      cfg.seed);
  fs::path run_dir = cfg.out_dir / fs::path("run-" + fingerprint.substr(0, 16));
  fs::create_directories(run_dir);

  triage::TriageConfig tc;
  tc.workers = cfg.workers;
  tc.seed = cfg.seed;
  tc.checkpoint_path = run_dir / "checkpoint.jsonl";

  triage::TriageResult result = triage::run_triage(
      dataset, cfg.myths, *scorer, oracle ? &*oracle : nullptr, policies, tc);
  result.write_labels(run_dir / "labels.jsonl");
  result.write_manifest(run_dir / "manifest.json");

  const auto& counters = result.counters();
  std::printf("%lld predictions over %lld items; %lld deferred (%.2f%%)\n",
              static_cast<long long>(counters.n_predictions),
              static_cast<long long>(counters.n_items),
              static_cast<long long>(counters.n_deferred),
              counters.n_predictions > 0
                  ? 100.0 * triage::deferral_rate(result)
                  : 0.0);
  std::cout << "labels: " << (run_dir / "labels.jsonl").string() << '\n';
  if (counters.n_unresolved > 0) {
    std::cerr << counters.n_unresolved
              << " deferred pairs fell back to local labels (oracle failure); "
                 "inspect the 'fallback' flags\n";
    return kExitOracle;
  }
  return kExitOk;
}

int cmd_eval(const CommonFlags& flags, const std::string& annotations_path) {
  if (flags.labels.empty() || flags.gold.empty()) {
    throw triage::ConfigError("eval needs --labels and --gold");
  }
  auto labels = triage::load_labels(flags.labels);
  triage::Dataset gold = triage::load_dataset(flags.gold);

  std::map<int, std::pair<std::vector<triage::StanceLabel>,
                          std::vector<triage::StanceLabel>>>
      per_myth;
  for (const auto& [key, fl] : labels) {
    const triage::VideoRecord* rec = gold.find(key.first);
    if (rec == nullptr || !rec->has_gold(key.second)) continue;
    auto& [g, p] = per_myth[key.second];
    g.push_back(rec->gold_stance(key.second));
    p.push_back(fl.label);
  }
  std::size_t overlap = 0;
  for (const auto& [myth, gp] : per_myth) overlap += gp.first.size();
  if (overlap == 0) {
    throw triage::EmptyInput("labels and gold share no (video, myth) pairs");
  }

  json report;
  json myths_json;
  std::vector<triage::StanceLabel> all_gold;
  std::vector<triage::StanceLabel> all_pred;
  for (const auto& [myth, gp] : per_myth) {
    const auto& [g, p] = gp;
    auto cm = triage::ConfusionMatrix::from_labels(g, p);
    json m;
    m["n"] = g.size();
    m["accuracy"] = triage::accuracy(cm);
    m["macro_f1"] = triage::macro_f1(cm);
    m["weighted_f1"] = triage::weighted_f1(cm);
    m["per_class_f1"] = triage::per_class_f1(cm);
    m["confusion"] = cm.to_json();
    myths_json[triage::myth_key(myth)] = std::move(m);
    all_gold.insert(all_gold.end(), g.begin(), g.end());
    all_pred.insert(all_pred.end(), p.begin(), p.end());
    std::printf("%s  n=%4zu  acc=%.4f  macroF1=%.4f  weightedF1=%.4f\n",
                triage::myth_key(myth).c_str(), g.size(),
                triage::accuracy(g, p), triage::macro_f1(g, p),
                triage::weighted_f1(g, p));
  }
  report["per_myth"] = std::move(myths_json);
  json pooled;
  pooled["n"] = all_gold.size();
  pooled["accuracy"] = triage::accuracy(all_gold, all_pred);
  pooled["macro_f1"] = triage::macro_f1(all_gold, all_pred);
  pooled["weighted_f1"] = triage::weighted_f1(all_gold, all_pred);
  report["pooled"] = std::move(pooled);
  std::printf("pooled  n=%4zu  acc=%.4f  macroF1=%.4f\n", all_gold.size(),
              triage::accuracy(all_gold, all_pred),
              triage::macro_f1(all_gold, all_pred));

  if (!annotations_path.empty()) {
    std::ifstream in(annotations_path);
    if (!in) {
      throw triage::ConfigError("cannot open annotations file: " +
                                annotations_path);
    }
    triage::AnnotationTable table;
    std::map<std::string, std::map<std::string, triage::StanceLabel>>
        by_annotator;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        json j = json::parse(line);
        const std::string item = j.at("item").get<std::string>();
        const std::string annotator = j.at("annotator").get<std::string>();
        const triage::StanceLabel label =
            triage::stance_from_int(j.at("label").get<int>());
        table.add(item, annotator, label);
        by_annotator[annotator][item] = label;
      } catch (const triage::Error&) {
        throw;
      } catch (const std::exception& e) {
        throw triage::ParseError(e.what(), line_no);
      }
    }
    json agreement;
    agreement["alpha"] = triage::krippendorff_alpha(table);
    std::printf("krippendorff_alpha=%.4f\n",
                agreement["alpha"].get<double>());
    if (by_annotator.size() == 2) {
      auto it = by_annotator.begin();
      const auto& a = it->second;
      const auto& b = std::next(it)->second;
      std::vector<triage::StanceLabel> va;
      std::vector<triage::StanceLabel> vb;
      for (const auto& [item, label] : a) {
        auto bit = b.find(item);
        if (bit == b.end()) continue;
        va.push_back(label);
        vb.push_back(bit->second);
      }
      if (!va.empty()) {
        agreement["kappa"] = triage::cohens_kappa(va, vb);
        std::printf("cohens_kappa=%.4f (n=%zu)\n",
                    agreement["kappa"].get<double>(), va.size());
      }
    }
    report["agreement"] = std::move(agreement);
  }

  triage::CampaignConfig cfg = load_config(flags);
  std::uint64_t fp = triage::fnv1a64("eval");
  fp = triage::fnv1a64_u64(file_hash(flags.labels), fp);
  fp = triage::fnv1a64_u64(file_hash(flags.gold), fp);
  const fs::path run_dir = make_run_dir(cfg.out_dir, "eval", fp);
  write_json(run_dir / "metrics.json", report);
  std::cout << "metrics: " << (run_dir / "metrics.json").string() << '\n';
  return kExitOk;
}

int cmd_cost(const CommonFlags& flags, const std::string& manifest_path,
             long long items, long long myths, long long deferred) {
  triage::CampaignConfig cfg = load_config(flags);
  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) {
      throw triage::ConfigError("cannot open manifest: " + manifest_path);
    }
    json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw triage::ParseError(e.what(), 0);
    }
    const json& c = j.at("counters");
    items = c.at("n_items").get<long long>();
    const long long predictions = c.at("n_predictions").get<long long>();
    myths = items > 0 ? predictions / items : 0;
    deferred = c.at("n_deferred").get<long long>();
  }
  if (items < 0 || myths < 0 || deferred < 0) {
    throw triage::ConfigError("cost needs --manifest or --items/--myths/--deferred");
  }

  const auto expert = triage::expert_plan(items, myths, cfg.cost);
  const auto oracle = triage::oracle_plan(items, myths, cfg.cost);
  const auto cascade = triage::cascade_plan(deferred, cfg.cost);
  const auto savings = triage::compare_plans({expert, oracle, cascade});

  std::printf("plan       %14s %14s %12s %12s\n", "hours", "money", "kWh",
              "kg CO2");
  for (const auto& r : {expert, oracle, cascade}) {
    std::printf("%-10s %14.2f %14.2f %12.2f %12.2f\n", r.plan.c_str(), r.hours,
                r.money, r.kwh, r.kg_co2);
  }
  auto pct = [](std::optional<double> v) {
    return v ? *v * 100.0 : std::nan("");
  };
  const auto& vs_expert = savings.cell(2, 0);
  const auto& vs_oracle = savings.cell(2, 1);
  std::printf("cascade vs expert: money %.0f%%, time %.0f%%\n",
              pct(vs_expert.money), pct(vs_expert.hours));
  std::printf("cascade vs oracle: money %.0f%%, time %.0f%%, energy %.0f%%\n",
              pct(vs_oracle.money), pct(vs_oracle.hours), pct(vs_oracle.kwh));

  json out;
  out["items"] = items;
  out["myths"] = myths;
  out["deferred"] = deferred;
  out["plans"] = {expert.to_json(), oracle.to_json(), cascade.to_json()};
  out["savings"] = savings.to_json();
  std::uint64_t fp = triage::fnv1a64("cost");
  fp = triage::fnv1a64(out.dump(), fp);
  const fs::path run_dir = make_run_dir(cfg.out_dir, "cost", fp);
  write_json(run_dir / "costs.json", out);
  std::cout << "costs: " << (run_dir / "costs.json").string() << '\n';
  return kExitOk;
}

int cmd_analyze(const CommonFlags& flags, const std::string& overrides_path,
                const std::string& judge_replay) {
  triage::CampaignConfig cfg = load_config(flags);
  if (flags.labels.empty()) throw triage::ConfigError("analyze needs --labels");
  if (cfg.dataset_path.empty()) throw triage::ConfigError("analyze needs --dataset");
  auto labels = triage::load_labels(flags.labels);
  triage::Dataset dataset = triage::load_dataset(cfg.dataset_path);

  triage::StanceMap stances;
  std::map<std::string, std::map<int, triage::StanceLabel>> per_video;
  for (const auto& [key, fl] : labels) {
    stances[key] = fl.label;
    per_video[key.first][key.second] = fl.label;
  }

  triage::ConflictPolicy conflict_policy;
  if (!overrides_path.empty()) {
    conflict_policy.overrides = triage::load_overrides(overrides_path);
  }
  std::optional<triage::OracleClient> judge;
  if (!judge_replay.empty()) {
    triage::OracleConfig oc;
    oc.replay_path = judge_replay;
    judge.emplace(oc);
    conflict_policy.judge = &*judge;
  } else if (cfg.oracle_mode != "none") {
    judge.emplace(triage::make_oracle(cfg).value());
    conflict_policy.judge = &*judge;
  }

  triage::OverallMap overall;
  std::size_t judged = 0;
  for (const auto& [video, myth_labels] : per_video) {
    const triage::VideoRecord* rec = dataset.find(video);
    triage::VideoRecord placeholder;
    if (rec == nullptr) {
      placeholder.video_id = video;
      rec = &placeholder;
    }
    auto resolution = triage::resolve_overall_stance(*rec, myth_labels,
                                                     conflict_policy);
    if (resolution.provenance != triage::StanceProvenance::Heuristic) ++judged;
    overall[video] = resolution.value;
  }

  std::uint64_t fp = triage::fnv1a64("analyze");
  fp = triage::fnv1a64_u64(file_hash(flags.labels), fp);
  fp = triage::fnv1a64_u64(file_hash(cfg.dataset_path), fp);
  if (!flags.graph.empty()) fp = triage::fnv1a64_u64(file_hash(flags.graph), fp);
  const fs::path run_dir = make_run_dir(cfg.out_dir, "analyze", fp);

  for (auto group : {triage::GroupBy::Myth, triage::GroupBy::Overall,
                     triage::GroupBy::Topic, triage::GroupBy::Filter}) {
    auto table = triage::label_distribution(dataset, stances, group, &overall);
    write_json(run_dir / ("distribution-" +
                          std::string(triage::group_by_name(group)) + ".json"),
               table.to_json());
    std::cout << table.format();
  }
  std::cout << judged << " conflicts resolved by override or judge\n";

  if (!flags.graph.empty()) {
    triage::RecommendationGraph graph = triage::load_graph(flags.graph);
    auto transitions = triage::transition_analysis(graph, overall);
    write_json(run_dir / "transitions.json", transitions.to_json());
    std::ofstream tsv(run_dir / "transitions.tsv");
    tsv << transitions.edge_summary();
    std::cout << transitions.format();
  } else {
    std::cout << "no --graph given; transition analysis skipped\n";
  }
  std::cout << "analysis written to " << run_dir.string() << '\n';
  return kExitOk;
}

int cmd_simulate(const CommonFlags& flags, int items, int myth_count,
                 double local_accuracy, double oracle_accuracy,
                 double val_fraction) {
  triage::CampaignConfig cfg = load_config(flags);
  if (items < 10) throw triage::ConfigError("simulate needs --items >= 10");
  if (myth_count < 1 || myth_count > triage::MythId::kMaxIndex) {
    throw triage::ConfigError("simulate needs 1..8 myths");
  }
  const std::uint64_t seed = cfg.seed;
  const auto myths = triage::default_myths(myth_count);

  // synthetic gold
  triage::Dataset dataset("synthetic");
  triage::Rng rng(triage::derive_seed(seed, "simulate-gold"));
  for (int i = 0; i < items; ++i) {
    triage::VideoRecord rec;
    rec.video_id = "v" + std::to_string(100000 + i);
    rec.title = "synthetic item " + std::to_string(i);
    for (const auto& myth : myths) {
      const double u = rng.uniform01();
      const int stance = u < 0.25 ? -1 : (u < 0.75 ? 0 : 1);
      rec.gold[myth.index()] = triage::raw_label_from_int(stance);
    }
    dataset.add(std::move(rec));
  }

  // oracle fixture: gold with seeded errors
  std::map<triage::LabelKey, std::string> oracle_entries;
  for (const auto& rec : dataset) {
    for (const auto& myth : myths) {
      const int gold = triage::stance_to_int(rec.gold_stance(myth.index()));
      triage::Rng r(triage::derive_seed(seed, "simulate-oracle", rec.video_id,
                                        myth.index()));
      int answer = gold;
      if (r.uniform01() >= oracle_accuracy) {
        const int others[2] = {gold == -1 ? 0 : -1, gold == 1 ? 0 : 1};
        answer = others[r.below(2)];
      }
      json entry;
      entry["LABEL"] = answer;
      entry["EXCERPTS"] = json::array();
      entry["JUSTIFICATION"] = "replayed synthetic verdict";
      entry["usage"] = {{"input_tokens", 6067}, {"output_tokens", 144}};
      oracle_entries[{rec.video_id, myth.index()}] = entry.dump();
    }
  }

  // validation/test split in dataset order
  const int val_n = std::max(1, static_cast<int>(items * val_fraction));
  triage::Dataset val_set("synthetic-val");
  triage::Dataset test_set("synthetic-test");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (static_cast<int>(i) < val_n ? val_set : test_set).add(dataset.at(i));
  }

  triage::SimulatedScorerSpec spec;
  spec.confusion = triage::SimulatedScorerSpec::diagonal_confusion(local_accuracy);
  spec.confidence_when_correct = 0.9;
  spec.confidence_when_wrong = 0.6;
  spec.seed = seed;
  triage::SimulatedScorer scorer(spec, dataset);

  // calibrate per myth on the validation slice
  std::map<int, triage::DeferralPolicy> policies;
  for (const auto& myth : myths) {
    MythValidation val = score_validation(val_set, scorer, myth, false, 20, seed);
    triage::DeferralPolicy policy;
    policy.mode = triage::PolicyMode::MSPplusVET;
    auto report = triage::calibrate_threshold(
        val.preds, val.gold, triage::CalibrationMetric::MaxProb, {});
    policy.msp_threshold = report.chosen_threshold;
    policy.vet_low_classes = triage::compute_vet_classes(val.preds, val.gold, 0.8);
    policies[myth.index()] = policy;
  }

  auto oracle = triage::OracleClient::replay_in_memory(oracle_entries);
  triage::TriageConfig tc;
  tc.workers = cfg.workers;
  tc.seed = seed;
  triage::TriageResult result =
      triage::run_triage(test_set, myths, scorer, &oracle, policies, tc);

  // cascade vs local-only on the test slice
  std::vector<triage::StanceLabel> gold;
  std::vector<triage::StanceLabel> local;
  std::vector<triage::StanceLabel> cascade;
  for (const auto& rec : test_set) {
    for (const auto& myth : myths) {
      gold.push_back(rec.gold_stance(myth.index()));
      local.push_back(scorer.score(rec, myth).argmax());
      cascade.push_back(result.at(rec.video_id, myth.index()).label);
    }
  }
  const double local_f1 = triage::macro_f1(gold, local);
  const double cascade_f1 = triage::macro_f1(gold, cascade);
  const double rate = triage::deferral_rate(result);
  std::printf("local macro F1   %.4f\n", local_f1);
  std::printf("cascade macro F1 %.4f (deferral %.1f%%)\n", cascade_f1,
              rate * 100.0);

  json report;
  report["items"] = items;
  report["myths"] = myth_count;
  report["local_accuracy"] = local_accuracy;
  report["oracle_accuracy"] = oracle_accuracy;
  report["local_macro_f1"] = local_f1;
  report["cascade_macro_f1"] = cascade_f1;
  report["deferral_rate"] = rate;
  std::uint64_t fp = triage::fnv1a64("simulate");
  fp = triage::fnv1a64(report.dump(), fp);
  const fs::path run_dir = make_run_dir(cfg.out_dir, "simulate", fp);
  write_json(run_dir / "report.json", report);
  result.write_labels(run_dir / "labels.jsonl");
  triage::save_policies(policies, run_dir / "policies.json");
  triage::save_dataset(dataset, run_dir / "dataset.jsonl");
  {
    std::ofstream fixture(run_dir / "oracle.jsonl");
    for (const auto& [key, body] : oracle_entries) {
      json line = json::parse(body);
      json entry;
      entry["video_id"] = key.first;
      entry["myth_index"] = key.second;
      for (const auto& [k, v] : line.items()) entry[k] = v;
      fixture << entry.dump() << '\n';
    }
  }
  std::cout << "report: " << (run_dir / "report.json").string() << '\n';

  if (oracle_accuracy > local_accuracy && cascade_f1 < local_f1) {
    std::cerr << "cascade underperformed the local scorer despite a stronger "
                 "oracle\n";
    return 1;
  }
  return kExitOk;
}

int cmd_serve(const std::string& replay, int port) {
  if (replay.empty()) throw triage::ConfigError("serve needs --replay");
  triage::OracleFixtureServer server(
      triage::OracleFixtureServer::entries_from_file(replay));
  if (port > 0) {
    server.start_on(port);
  } else {
    port = server.start();
  }
  std::cout << "fixture oracle listening on 127.0.0.1:" << port
            << " (POST /label, /judge; GET /stats)\n";
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost-aware inference triage engine"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string annotations;
  std::string manifest;
  std::string overrides;
  std::string judge_replay;
  long long items = -1;
  long long myth_count = -1;
  long long deferred = -1;
  double grid_step = 0;
  int sim_items = 1000;
  int sim_myths = 1;
  double sim_local_acc = 0.75;
  double sim_oracle_acc = 0.95;
  double sim_val_fraction = 0.3;
  int serve_port = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "campaign config file");
    cmd->add_option("--dataset", flags.dataset, "dataset file (jsonl)");
    cmd->add_option("--policies", flags.policies, "policies file");
    cmd->add_option("--labels", flags.labels, "labels file (jsonl)");
    cmd->add_option("--gold", flags.gold, "gold dataset file (jsonl)");
    cmd->add_option("--graph", flags.graph, "recommendation graph file (jsonl)");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--replay", flags.replay, "oracle replay fixture file");
    cmd->add_option("--seed", flags.seed, "campaign seed");
    cmd->add_option("--workers", flags.workers, "local scoring parallelism");
    cmd->add_option("--oracle-inflight", flags.oracle_inflight,
                    "max concurrent oracle requests");
  };

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "sweep deferral thresholds on a validation split");
  add_common(calibrate);
  calibrate->add_option("--grid-step", grid_step,
                        "threshold grid step (default from config, 0.01)");

  CLI::App* run = app.add_subcommand("run", "run a labeling campaign");
  add_common(run);

  CLI::App* eval = app.add_subcommand("eval", "score labels against gold");
  add_common(eval);
  eval->add_option("--annotations", annotations,
                   "multi-annotator file for alpha/kappa (jsonl)");

  CLI::App* cost = app.add_subcommand("cost", "cost/time/energy accounting");
  add_common(cost);
  cost->add_option("--manifest", manifest, "run manifest to read counts from");
  cost->add_option("--items", items, "item count");
  cost->add_option("--myths", myth_count, "myth count");
  cost->add_option("--deferred", deferred, "deferred prediction count");

  CLI::App* analyze =
      app.add_subcommand("analyze", "prevalence, bias and transition analysis");
  add_common(analyze);
  analyze->add_option("--overrides", overrides, "manual stance overrides file");
  analyze->add_option("--judge-replay", judge_replay,
                      "judge oracle replay fixture");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "synthetic calibrate/run/eval round trip");
  add_common(simulate);
  simulate->add_option("--items", sim_items, "synthetic item count");
  simulate->add_option("--myths", sim_myths, "synthetic myth count");
  simulate->add_option("--local-accuracy", sim_local_acc,
                       "simulated scorer accuracy");
  simulate->add_option("--oracle-accuracy", sim_oracle_acc,
                       "replay oracle accuracy");
  simulate->add_option("--val-fraction", sim_val_fraction,
                       "validation split fraction");

  CLI::App* serve = app.add_subcommand("serve", "serve an oracle fixture file");
  add_common(serve);
  serve->add_option("--port", serve_port, "port (default: any free port)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(flags, grid_step);
    if (run->parsed()) return cmd_run(flags);
    if (eval->parsed()) return cmd_eval(flags, annotations);
    if (cost->parsed()) return cmd_cost(flags, manifest, items, myth_count, deferred);
    if (analyze->parsed()) return cmd_analyze(flags, overrides, judge_replay);
    if (simulate->parsed()) {
      return cmd_simulate(flags, sim_items, sim_myths, sim_local_acc,
                          sim_oracle_acc, sim_val_fraction);
    }
    if (serve->parsed()) return cmd_serve(flags.replay, serve_port);
  } catch (const triage::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}
