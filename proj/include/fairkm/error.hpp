#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairkm {

// Base of every error raised by the library. Callers that only care about
// "something about the input was wrong" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required column is missing or the header is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed. Row numbers are 1-based file lines
// (the header is line 1); columns are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Input violates a documented invariant (too few groups, K out of range...).
class ValidityError : public Error {
 public:
  using Error::Error;
};

// All points coincide, so ratio metrics are undefined.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation precondition (e.g. empty cluster passed to
// update_centroids).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairkm
