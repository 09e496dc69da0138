#pragma once

#include <stdexcept>
#include <string>

namespace blockcov {

// Base class for all library errors.  Each subclass carries a stable
// machine-readable prefix so callers (and the CLI) can classify failures
// without parsing free text.
class Error : public std::runtime_error {
 public:
  Error(const std::string& prefix, const std::string& what)
      : std::runtime_error(prefix + ": " + what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class DefinitenessError : public Error {
 public:
  explicit DefinitenessError(const std::string& what) : Error("definiteness", what) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what) : Error("data", what) {}
};

class CsvError : public Error {
 public:
  explicit CsvError(const std::string& what) : Error("csv", what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error("convergence", what) {}
};

}  // namespace blockcov
