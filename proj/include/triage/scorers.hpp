#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>

#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/probability.hpp"
#include "triage/records.hpp"
#include "triage/rng.hpp"

namespace triage {

enum class PredictionSource { LocalScorer, Oracle };

inline constexpr std::string_view source_name(PredictionSource s) {
  return s == PredictionSource::LocalScorer ? "local" : "oracle";
}

/// One scored (video, myth) pair.
struct Prediction {
  std::string video_id;
  int myth_index = 1;
  StanceLabel label = StanceLabel::Neither;
  ProbabilityVector probs;
  PredictionSource source = PredictionSource::LocalScorer;
};

inline Prediction make_local_prediction(const VideoRecord& rec, const MythId& myth,
                                        ProbabilityVector probs) {
  Prediction p;
  p.video_id = rec.video_id;
  p.myth_index = myth.index();
  p.label = probs.argmax();
  p.probs = probs;
  p.source = PredictionSource::LocalScorer;
  return p;
}

/// Uniform interface over 3-class scorers. Implementations must be safe for
/// concurrent score() calls, and stochastic scoring must derive its
/// randomness from (seed, video_id, myth) only, never from call order.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ProbabilityVector score(const VideoRecord& rec,
                                  const MythId& myth) const = 0;

  virtual bool supports_stochastic() const { return false; }

  /// Exactly `passes` vectors, reproducible for a fixed seed.
  virtual std::vector<ProbabilityVector> score_stochastic(
      const VideoRecord& rec, const MythId& myth, int passes,
      std::uint64_t seed) const {
    (void)rec;
    (void)myth;
    (void)passes;
    (void)seed;
    throw UnsupportedMode("scorer has no stochastic mode");
  }

  /// Stable description of the scorer's configuration; folded into campaign
  /// fingerprints.
  virtual std::string fingerprint() const = 0;
};

/// Always returns one fixed probability vector.
class StubScorer : public Scorer {
 public:
  explicit StubScorer(ProbabilityVector fixed) : fixed_(fixed) {}

  ProbabilityVector score(const VideoRecord&, const MythId&) const override {
    return fixed_;
  }

  std::string fingerprint() const override {
    std::ostringstream os;
    os << "stub:" << fixed_[0] << ',' << fixed_[1] << ',' << fixed_[2];
    return os.str();
  }

 private:
  ProbabilityVector fixed_;
};

/// Replays probabilities recorded in a fixture file: one JSON object per
/// line with video_id, myth_index, probs, and optionally passes (a list of
/// per-pass vectors for stochastic replay). A pure function of the file.
class ReplayScorer : public Scorer {
 public:
  explicit ReplayScorer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scorer fixture file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t hash = fnv1a64("scorer-fixture");
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      hash = fnv1a64(line, hash);
      json j;
      try {
        j = json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what(), line_no);
      }
      try {
        Entry entry;
        entry.probs = parse_probs_(j.at("probs"));
        if (auto it = j.find("passes"); it != j.end() && !it->is_null()) {
          for (const auto& pass : *it) entry.passes.push_back(parse_probs_(pass));
        }
        LabelKey key{j.at("video_id").get<std::string>(),
                     j.at("myth_index").get<int>()};
        entries_[std::move(key)] = std::move(entry);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad fixture entry: ") + e.what(), line_no);
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
      }
    }
    fingerprint_ = "replay-scorer:" + to_hex(hash);
  }

  ProbabilityVector score(const VideoRecord& rec, const MythId& myth) const override {
    return find_(rec.video_id, myth.index()).probs;
  }

  bool supports_stochastic() const override { return true; }

  std::vector<ProbabilityVector> score_stochastic(const VideoRecord& rec,
                                                  const MythId& myth, int passes,
                                                  std::uint64_t) const override {
    if (passes < 1) throw InvalidArgument("passes must be >= 1");
    const Entry& entry = find_(rec.video_id, myth.index());
    const auto& stored = entry.passes.empty()
                             ? std::vector<ProbabilityVector>{entry.probs}
                             : entry.passes;
    if (stored.size() < static_cast<std::size_t>(passes)) {
      throw MalformedResponse("fixture stores " + std::to_string(stored.size()) +
                              " passes, " + std::to_string(passes) +
                              " requested for " + rec.video_id + "/" +
                              myth.key());
    }
    return {stored.begin(), stored.begin() + passes};
  }

  std::string fingerprint() const override { return fingerprint_; }

 private:
  struct Entry {
    ProbabilityVector probs;
    std::vector<ProbabilityVector> passes;
  };

  static ProbabilityVector parse_probs_(const json& j) {
    if (!j.is_array() || j.size() != 3) {
      throw InvalidArgument("probs must be an array of 3 numbers");
    }
    return ProbabilityVector(j[0].get<double>(), j[1].get<double>(),
                             j[2].get<double>());
  }

  const Entry& find_(const std::string& video_id, int myth_index) const {
    auto it = entries_.find(LabelKey{video_id, myth_index});
    if (it == entries_.end()) {
      throw MissingFixture("no fixture entry for " + video_id + "/" +
                           myth_key(myth_index));
    }
    return it->second;
  }

  std::map<LabelKey, Entry> entries_;
  std::string fingerprint_;
};

/// Desk-scale stand-in for a trained lightweight model: samples the predicted
/// class from a per-gold-class confusion row, then reports a confidence that
/// depends on whether the draw was correct.
struct SimulatedScorerSpec {
  std::array<std::array<double, 3>, 3> confusion = identity_confusion();
  double confidence_when_correct = 0.9;  // in (1/3, 1]
  double confidence_when_wrong = 0.6;    // in (1/3, 1]
  double stochastic_jitter = 0.0;        // per-pass perturbation amplitude
  std::uint64_t seed = 0;

  static std::array<std::array<double, 3>, 3> identity_confusion() {
    return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  }

  static std::array<std::array<double, 3>, 3> uniform_confusion() {
    const double t = 1.0 / 3;
    return {{{t, t, t}, {t, t, t}, {t, t, t}}};
  }

  /// Identity-biased confusion: `diagonal` mass on the gold class, the rest
  /// split evenly between the other two.
  static std::array<std::array<double, 3>, 3> diagonal_confusion(double diagonal) {
    if (diagonal < 0 || diagonal > 1) {
      throw InvalidArgument("diagonal must be in [0,1]");
    }
    const double off = (1.0 - diagonal) / 2;
    std::array<std::array<double, 3>, 3> m{};
    for (std::size_t g = 0; g < 3; ++g) {
      for (std::size_t p = 0; p < 3; ++p) m[g][p] = g == p ? diagonal : off;
    }
    return m;
  }

  void validate() const {
    for (const auto& row : confusion) {
      double sum = 0;
      for (double v : row) {
        if (v < 0) throw InvalidArgument("confusion entries must be >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("confusion rows must sum to 1");
      }
    }
    for (double c : {confidence_when_correct, confidence_when_wrong}) {
      if (!(c > 1.0 / 3 && c <= 1.0)) {
        throw InvalidArgument("confidence must be in (1/3, 1]");
      }
    }
    if (stochastic_jitter < 0) throw InvalidArgument("jitter must be >= 0");
  }

  json to_json() const {
    json j;
    j["confusion"] = confusion;
    j["confidence_when_correct"] = confidence_when_correct;
    j["confidence_when_wrong"] = confidence_when_wrong;
    j["stochastic_jitter"] = stochastic_jitter;
    j["seed"] = seed;
    return j;
  }

  static SimulatedScorerSpec from_json(const json& j) {
    SimulatedScorerSpec spec;
    if (auto it = j.find("confusion"); it != j.end()) {
      spec.confusion = it->get<std::array<std::array<double, 3>, 3>>();
    }
    spec.confidence_when_correct =
        j.value("confidence_when_correct", spec.confidence_when_correct);
    spec.confidence_when_wrong =
        j.value("confidence_when_wrong", spec.confidence_when_wrong);
    spec.stochastic_jitter = j.value("stochastic_jitter", spec.stochastic_jitter);
    spec.seed = j.value("seed", spec.seed);
    spec.validate();
    return spec;
  }
};

class SimulatedScorer : public Scorer {
 public:
  SimulatedScorer(SimulatedScorerSpec spec, const Dataset& gold_source)
      : spec_(spec) {
    spec_.validate();
    for (const auto& rec : gold_source) {
      for (const auto& [myth, raw] : rec.gold) {
        gold_[LabelKey{rec.video_id, myth}] = consolidate_raw_label(raw);
      }
    }
  }

  ProbabilityVector score(const VideoRecord& rec, const MythId& myth) const override {
    auto it = gold_.find(LabelKey{rec.video_id, myth.index()});
    if (it == gold_.end()) throw MissingGold(rec.video_id);
    const StanceLabel gold = it->second;
    Rng rng(derive_seed(spec_.seed, "sim", rec.video_id, myth.index()));
    const auto& row = spec_.confusion[stance_index(gold)];
    const double u = rng.uniform01();
    std::size_t predicted = 2;
    double cumulative = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      cumulative += row[i];
      if (u < cumulative) {
        predicted = i;
        break;
      }
    }
    const bool correct = predicted == stance_index(gold);
    const double conf =
        correct ? spec_.confidence_when_correct : spec_.confidence_when_wrong;
    const double rest = (1.0 - conf) / 2;
    std::array<double, 3> p{rest, rest, rest};
    p[predicted] = conf;
    return ProbabilityVector::from_array(p);
  }

  bool supports_stochastic() const override { return true; }

  std::vector<ProbabilityVector> score_stochastic(const VideoRecord& rec,
                                                  const MythId& myth, int passes,
                                                  std::uint64_t seed) const override {
    if (passes < 1) throw InvalidArgument("passes must be >= 1");
    const ProbabilityVector base = score(rec, myth);
    std::vector<ProbabilityVector> out;
    out.reserve(static_cast<std::size_t>(passes));
    for (int pass = 0; pass < passes; ++pass) {
      if (spec_.stochastic_jitter == 0) {
        out.push_back(base);
        continue;
      }
      Rng rng(derive_seed(seed, "sim-pass", rec.video_id, myth.index(), pass));
      std::array<double, 3> p = base.data();
      for (double& v : p) {
        v += spec_.stochastic_jitter * (rng.uniform01() * 2 - 1);
        if (v < 0) v = 0;
      }
      double sum = p[0] + p[1] + p[2];
      out.push_back(sum > 0 ? ProbabilityVector::normalized(p) : base);
    }
    return out;
  }

  std::string fingerprint() const override {
    return "simulated:" + spec_.to_json().dump();
  }

 private:
  SimulatedScorerSpec spec_;
  std::map<LabelKey, StanceLabel> gold_;
};

/// Remote scorer speaking JSON over HTTP: POST {video_id, myth_index,
/// myth_definition, title, description, transcript, tags} and expect
/// {"probs": [oppose, neither, support]}.
struct RemoteScorerConfig {
  std::string host;
  int port = 80;
  std::string path = "/score";
  int timeout_ms = 30000;
  std::string token;
};

class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(RemoteScorerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.host.empty()) throw ConfigError("remote scorer needs a host");
  }

  ProbabilityVector score(const VideoRecord& rec, const MythId& myth) const override {
    json body;
    body["video_id"] = rec.video_id;
    body["myth_index"] = myth.index();
    body["myth_definition"] = myth.definition();
    body["title"] = rec.title;
    body["description"] = rec.description;
    body["transcript"] = rec.transcript;
    body["tags"] = rec.tags;

    httplib::Client client(cfg_.host, cfg_.port);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    if (!cfg_.token.empty()) {
      client.set_default_headers({{"Authorization", "Bearer " + cfg_.token}});
    }
    auto res = client.Post(cfg_.path, body.dump(), "application/json");
    if (!res) {
      throw ScorerUnavailable("remote scorer unreachable: " + cfg_.host + ":" +
                              std::to_string(cfg_.port));
    }
    if (res->status != 200) {
      throw ScorerUnavailable("remote scorer returned status " +
                              std::to_string(res->status));
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("remote scorer sent bad JSON: ") +
                              e.what());
    }
    auto it = reply.find("probs");
    if (it == reply.end() || !it->is_array() || it->size() != 3) {
      throw MalformedResponse("remote scorer reply lacks a 3-element probs array");
    }
    try {
      return ProbabilityVector((*it)[0].get<double>(), (*it)[1].get<double>(),
                               (*it)[2].get<double>());
    } catch (const Error& e) {
      throw MalformedResponse(std::string("remote scorer probs invalid: ") +
                              e.what());
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("remote scorer probs invalid: ") +
                              e.what());
    }
  }

  std::string fingerprint() const override {
    return "remote:" + cfg_.host + ":" + std::to_string(cfg_.port) + cfg_.path;
  }

 private:
  RemoteScorerConfig cfg_;
};

}  // namespace triage
