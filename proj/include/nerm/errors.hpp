#ifndef NERM_ERRORS_HPP
#define NERM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nerm {

// Malformed input data; carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Invalid run/task configuration (bad token, empty class, unusable combo).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A verification oracle refused the input or failed to converge.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Metric preconditions violated (e.g. single-class AUC input).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nerm

#endif
