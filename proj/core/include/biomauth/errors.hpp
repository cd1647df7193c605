#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace biomauth {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with input data: files, schemas, values, or sample counts.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A required CSV column is absent from the header.
class SchemaError : public DataError {
 public:
  SchemaError(const std::string& message, std::string column)
      : DataError(message), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A cell could not be read as a number. `row` is 1-based over data rows.
class ParseError : public DataError {
 public:
  ParseError(const std::string& message, std::size_t row, std::string column)
      : DataError(message), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// A value parsed but violates a record invariant (non-finite, chord > path).
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

/// Not enough users or samples to perform the requested operation.
class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Feature vector width does not match what a model or scaler expects.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or received unusable labels.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// A metric cannot be computed from the given predictions.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Model file could not be read back.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failure inside one experiment cell with its coordinates.
class CellError : public Error {
 public:
  CellError(const std::string& message, std::exception_ptr cause)
      : Error(message), cause_(std::move(cause)) {}
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::exception_ptr cause_;
};

}  // namespace biomauth
