#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reachdiff {

// Bad argument or configuration value. Maps to exit code 2 in the CLI.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed reach-log input. Row numbers are 1-based data rows (header excluded).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// A learner could not be fit (too few rows in an arm, empty data, ...).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The ball around a test point holds no reaches from one of the groups.
class UndefinedGroundTruth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reachdiff
