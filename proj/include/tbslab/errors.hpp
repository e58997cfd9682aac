#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tbslab {

/// Base of every error raised by the library. `exit_code()` is the process
/// status the CLI reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad input: malformed files, invalid configuration, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file that does not parse. The message names line and column.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : ValidationError(what + " (line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Requested more distinct samples than the mask has free cells.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Caller broke an API contract (negative distance, out-of-range index, ...).
class ContractViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Factorization failed even after jitter escalation.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A trajectory walker ran out of step budget before collecting m samples.
class StallError : public Error {
 public:
  StallError(const std::string& what, std::size_t achieved)
      : Error(what), achieved_(achieved) {}
  std::size_t achieved() const noexcept { return achieved_; }
  int exit_code() const noexcept override { return 3; }

 private:
  std::size_t achieved_;
};

/// Too many stalled trials for a Monte Carlo estimate to be trusted.
class StallBudgetError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace tbslab
