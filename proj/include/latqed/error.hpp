#pragma once

#include <stdexcept>
#include <string>

namespace latqed {

/// Failure category; doubles as the CLI exit code.
enum class ErrorCategory : int { Config = 2, Numeric = 3, Regime = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Invalid parameters, index out of range, malformed input files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

/// Solver non-convergence, degenerate points, lost eigenvalue tracks.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

/// A requested quantity does not exist in the given physical regime
/// (no supercriticality, energy above the WKB barrier, ...).
class RegimeError : public Error {
 public:
  explicit RegimeError(const std::string& what) : Error(ErrorCategory::Regime, what) {}
};

}  // namespace latqed
