#pragma once

#include <stdexcept>
#include <string>

namespace holo {

// Process exit codes used by the CLI; one per failure category.
enum class ErrorCategory : int {
  kValidation = 2,
  kIo = 3,
  kFormat = 4,
  kDependency = 5,
  kNumeric = 6,
  kConfig = 7,
  kUnavailable = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::kFormat, what) {}
};

// A prerequisite artifact (checkpoint, corpus) is missing.
class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& what) : Error(ErrorCategory::kDependency, what) {}
};

// Training diverged (NaN/inf loss).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::kNumeric, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::kConfig, what) {}
};

// A requested backend (e.g. an external embedding provider) cannot be used.
class UnavailableError : public Error {
 public:
  explicit UnavailableError(const std::string& what) : Error(ErrorCategory::kUnavailable, what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace holo
