#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rodtrap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidGeometry : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// The requested estimate does not exist for this input (e.g. an empty channel).
class UndefinedResult : public Error {
 public:
  using Error::Error;
};

/// A fit did not produce a usable estimate. Carries the cost after each
/// iteration so callers can report what the solver did.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> trace = {})
      : Error(what), trace_(std::move(trace)) {}
  [[nodiscard]] const std::vector<double>& residual_trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

class NoPeakError : public FitError {
 public:
  using FitError::FitError;
};

struct FieldIssue {
  std::string path;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<FieldIssue> issues);
  ConfigError(std::string path, std::string message)
      : ConfigError(std::vector<FieldIssue>{{std::move(path), std::move(message)}}) {}
  [[nodiscard]] const std::vector<FieldIssue>& issues() const { return issues_; }

 private:
  std::vector<FieldIssue> issues_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(std::string file)
      : Error("missing or corrupt artifact: " + file), file_(std::move(file)) {}
  [[nodiscard]] const std::string& file() const { return file_; }

 private:
  std::string file_;
};

}  // namespace rodtrap
