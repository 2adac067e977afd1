#pragma once

#include <stdexcept>
#include <string>

namespace tracelink {

/// Failure categories. The CLI maps each to a process exit code.
enum class ErrorKind {
  Config,       // bad configuration or flag values
  Io,           // unreadable / unwritable files
  Data,         // malformed or inconsistent input data
  Sampling,     // negative sampling could not be satisfied
  Model,        // shape / dimension mismatch
  Training,     // training or evaluation could not proceed
  Metric,       // metric undefined for the given input
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Data: return "data";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::Model: return "model";
    case ErrorKind::Training: return "training";
    case ErrorKind::Metric: return "metric";
  }
  return "unknown";
}

}  // namespace tracelink
