#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srbo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate a precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Experiment or CLI configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dataset could not be loaded or is malformed.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite values or a solver breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace srbo
