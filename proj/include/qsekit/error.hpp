#pragma once

#include <stdexcept>
#include <string>

namespace qsekit {

/// Raised when a numerical routine cannot produce a result satisfying its
/// contract (broken metric, empty retained subspace, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (FCIDUMP, manifest, config). Carries the line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Invalid experiment configuration (unknown keys, bad values, missing files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsekit
