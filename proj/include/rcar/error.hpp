#pragma once

#include <stdexcept>
#include <string>

namespace rcar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input to an operation (violated precondition, invalid distribution, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document; carries the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed panel or sidecar file; carries the 1-based line number (0 if none).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A computation that requires eigenvalues strictly inside the unit circle
/// received a model that does not satisfy it.
class NonstationaryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A series hit its term cap before the truncation criterion was met.
class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double tail_estimate)
      : NumericalError(what + " (last tail estimate " +
                       std::to_string(tail_estimate) + ")"),
        tail_estimate_(tail_estimate) {}
  double tail_estimate() const noexcept { return tail_estimate_; }

 private:
  double tail_estimate_;
};

/// Singular or rank-deficient second-moment matrix (some linear combination
/// of lagged states is exactly determined).
class RankDeficiencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rcar
