#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triage {

/// Base class for every typed error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// dataset ingestion

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate video_id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class MissingField : public Error {
 public:
  explicit MissingField(const std::string& field)
      : Error("missing field: " + field), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

// scorers

class ScorerUnavailable : public Error {
 public:
  using Error::Error;
};

class MalformedResponse : public Error {
 public:
  using Error::Error;
};

class MissingFixture : public MalformedResponse {
 public:
  using MalformedResponse::MalformedResponse;
};

class UnsupportedMode : public Error {
 public:
  using Error::Error;
};

class MissingGold : public Error {
 public:
  explicit MissingGold(const std::string& video_id)
      : Error("no gold label for video_id: " + video_id), id_(video_id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

// oracle client

class OracleUnreachable : public Error {
 public:
  using Error::Error;
};

class OracleBadLabel : public Error {
 public:
  using Error::Error;
};

class OracleBadJson : public Error {
 public:
  using Error::Error;
};

// deferral / metrics

class EmptySamples : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyValidation : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DegenerateData : public Error {
 public:
  using Error::Error;
};

// pipeline

class EmptyResult : public Error {
 public:
  using Error::Error;
};

class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

class Interrupted : public Error {
 public:
  using Error::Error;
};

// analysis

class EmptyLabels : public Error {
 public:
  using Error::Error;
};

class UnresolvedConflict : public Error {
 public:
  using Error::Error;
};

class EmptyDistribution : public Error {
 public:
  using Error::Error;
};

class UnknownGroupKey : public Error {
 public:
  using Error::Error;
};

// cost model

class DivisionByZero : public Error {
 public:
  using Error::Error;
};

}  // namespace triage
