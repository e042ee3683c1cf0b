#pragma once

#include <stdexcept>
#include <string>

namespace steerkit {

/// Bad input data or configuration: maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A metric's precondition does not hold for the given record
/// (e.g. readability on an empty text). Corpus aggregation catches
/// these and counts the record in the skip tally.
class UndefinedMetricError : public ValidationError {
 public:
  explicit UndefinedMetricError(const std::string& what) : ValidationError(what) {}
};

/// File or network I/O failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace steerkit
