#pragma once

#include <stdexcept>
#include <string>

namespace dga {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch; the message carries both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or inconsistent run setup.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents; the message carries the offset or line number.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Operation called on an object that is not in a usable state yet.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_str(long rows, long cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace dga
