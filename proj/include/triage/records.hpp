#pragma once

#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triage/errors.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"

namespace triage {

/// One item's textual metadata plus optional gold labels per myth.
/// Immutable by convention once it has entered a Dataset.
struct VideoRecord {
  std::string video_id;
  std::string title;
  std::string description;
  std::string transcript;  // possibly empty; transcripts are not always available
  std::vector<std::string> tags;
  std::map<int, RawLabel> gold;  // myth index -> raw gold label

  // optional grouping metadata used by the analysis module
  std::string topic;
  std::string filter;
  std::string query;

  bool has_gold(int myth_index) const { return gold.count(myth_index) > 0; }

  RawLabel gold_raw(int myth_index) const {
    auto it = gold.find(myth_index);
    if (it == gold.end()) throw MissingGold(video_id);
    return it->second;
  }

  /// Gold label consolidated onto the 3-class scale.
  StanceLabel gold_stance(int myth_index) const {
    return consolidate_raw_label(gold_raw(myth_index));
  }

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

/// An ordered collection of records with unique video ids. Iteration order is
/// the insertion (file) order and is stable across runs.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::string name, std::string provenance = "")
      : name_(std::move(name)), provenance_(std::move(provenance)) {}

  void add(VideoRecord rec) {
    if (rec.video_id.empty()) throw MissingField("video_id");
    auto [it, inserted] = index_.emplace(rec.video_id, records_.size());
    if (!inserted) throw DuplicateId(rec.video_id);
    records_.push_back(std::move(rec));
  }

  const std::vector<VideoRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const VideoRecord& at(std::size_t i) const { return records_.at(i); }

  const VideoRecord* find(std::string_view video_id) const {
    auto it = index_.find(video_id);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  const std::string& name() const { return name_; }
  const std::string& provenance() const { return provenance_; }
  void set_name(std::string name) { name_ = std::move(name); }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.name_ == b.name_ && a.provenance_ == b.provenance_ &&
           a.records_ == b.records_;
  }

 private:
  std::string name_;
  std::string provenance_;
  std::vector<VideoRecord> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

namespace detail {

inline std::string require_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw MissingField(field);
  if (!it->is_string()) {
    throw InvalidArgument(std::string("field is not a string: ") + field);
  }
  return it->get<std::string>();
}

inline std::string optional_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw InvalidArgument(std::string("field is not a string: ") + field);
  }
  return it->get<std::string>();
}

}  // namespace detail

inline VideoRecord record_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("record line is not a JSON object");
  VideoRecord rec;
  rec.video_id = detail::require_string(j, "video_id");
  if (rec.video_id.empty()) throw MissingField("video_id");
  rec.title = detail::optional_string(j, "title");
  rec.description = detail::optional_string(j, "description");
  rec.transcript = detail::optional_string(j, "transcript");
  if (auto it = j.find("tags"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw InvalidArgument("tags is not an array");
    for (const auto& t : *it) {
      if (!t.is_string()) throw InvalidArgument("tag is not a string");
      rec.tags.push_back(t.get<std::string>());
    }
  }
  if (auto it = j.find("gold"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw InvalidArgument("gold is not an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number_integer()) {
        throw InvalidArgument("gold label is not an integer: " + key);
      }
      rec.gold[myth_index_from_key(key)] = raw_label_from_int(value.get<int>());
    }
  }
  rec.topic = detail::optional_string(j, "topic");
  rec.filter = detail::optional_string(j, "filter");
  rec.query = detail::optional_string(j, "query");
  return rec;
}

inline json record_to_json(const VideoRecord& rec) {
  json j;
  j["video_id"] = rec.video_id;
  j["title"] = rec.title;
  j["description"] = rec.description;
  j["transcript"] = rec.transcript;
  j["tags"] = rec.tags;
  if (!rec.gold.empty()) {
    json g;
    for (const auto& [myth, raw] : rec.gold) g[myth_key(myth)] = raw_label_to_int(raw);
    j["gold"] = g;
  }
  if (!rec.topic.empty()) j["topic"] = rec.topic;
  if (!rec.filter.empty()) j["filter"] = rec.filter;
  if (!rec.query.empty()) j["query"] = rec.query;
  return j;
}

/// Loads a dataset from a UTF-8 file with one JSON object per line. Order is
/// preserved; duplicate video ids are rejected.
inline Dataset load_dataset(const std::filesystem::path& path,
                            std::string name = "") {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path.string());
  Dataset ds(name.empty() ? path.filename().string() : std::move(name),
             path.string());
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
      ds.add(record_from_json(j));
    } catch (const DuplicateId&) {
      throw;
    } catch (const MissingField&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset file: " + path.string());
  for (const auto& rec : ds) out << record_to_json(rec).dump() << '\n';
}

namespace detail {

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace detail

/// Concatenated model input: title, description, transcript, then tags, in
/// reading-priority order, separated by single newlines. Tags are joined by
/// single spaces.
inline std::string concatenated_text(const VideoRecord& rec) {
  std::string text = rec.title;
  text += '\n';
  text += rec.description;
  text += '\n';
  text += rec.transcript;
  text += '\n';
  for (std::size_t i = 0; i < rec.tags.size(); ++i) {
    if (i > 0) text += ' ';
    text += rec.tags[i];
  }
  return text;
}

/// Keeps the first `max_tokens` whitespace-delimited tokens of the record's
/// concatenated text. The kept prefix preserves its original whitespace.
/// Tokenization is plain whitespace splitting, not a model tokenizer; the
/// limit is a budget, not an exact model context.
inline std::string truncate_text(const VideoRecord& rec, std::size_t max_tokens) {
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
  std::string text = concatenated_text(rec);
  std::size_t count = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && detail::is_space(text[i])) ++i;
    if (i >= n) break;
    ++count;
    while (i < n && !detail::is_space(text[i])) ++i;
    if (count == max_tokens) return text.substr(0, i);
  }
  return text;
}

/// Number of whitespace-delimited tokens in a string.
inline std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(text[i])) ++i;
    if (i >= text.size()) break;
    ++count;
    while (i < text.size() && !detail::is_space(text[i])) ++i;
  }
  return count;
}

}  // namespace triage
