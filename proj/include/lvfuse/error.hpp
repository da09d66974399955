#pragma once

#include <stdexcept>
#include <string>

namespace lvfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: schema mismatch, unparsable cells, unknown levels.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class UnknownLevelError : public DataError {
 public:
  UnknownLevelError(const std::string& variable, const std::string& level)
      : DataError("unknown level '" + level + "' for variable '" + variable + "'"),
        variable_(variable),
        level_(level) {}

  const std::string& variable() const noexcept { return variable_; }
  const std::string& level() const noexcept { return level_; }

 private:
  std::string variable_;
  std::string level_;
};

/// Linear-algebra or optimisation failure (singular matrix, degenerate fit).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lvfuse
