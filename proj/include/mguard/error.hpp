#pragma once

#include <stdexcept>
#include <string>

namespace mguard {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Binary container problems: bad magic, version, truncation.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// Tensor shapes that do not line up. `dimension` names the offending axis.
class ShapeError : public DataError {
 public:
  ShapeError(const std::string& dimension, long expected, long actual)
      : DataError("shape mismatch in " + dimension + ": expected " + std::to_string(expected) + ", got " +
                  std::to_string(actual)),
        dimension_(dimension) {}

  const std::string& dimension() const noexcept { return dimension_; }

 private:
  std::string dimension_;
};

/// NaN/Inf in a loss, gradient or objective (exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

inline void expect_dim(const char* dimension, long expected, long actual) {
  if (expected != actual) throw ShapeError(dimension, expected, actual);
}

}  // namespace mguard
