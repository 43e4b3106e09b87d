#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tourrec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column = 0)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line);
    if (column > 0) out += (out.empty() ? "" : ", ") + std::string("column ") + std::to_string(column);
    return out.empty() ? message : out + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

/// A domain invariant would be violated (out-of-range rating, orphan class, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

/// A derived vector no longer matches the ontology it was computed against.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tourrec
