#pragma once

#include <stdexcept>
#include <string>

namespace aeromap {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A value outside the mathematical domain of an operation
/// (e.g. relative humidity >= 100 in the PM correction).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Malformed input file. Carries 1-based line/column of the offending token
/// when known (0 = unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
      : Error(format(msg, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& msg, std::size_t line, std::size_t column) {
    if (line == 0) return msg;
    std::string s = msg + " (line " + std::to_string(line);
    if (column != 0) s += ", column " + std::to_string(column);
    return s + ")";
  }
  std::size_t line_;
  std::size_t column_;
};

/// Numerically singular or geometrically degenerate linear system.
class SingularSystemError : public Error {
 public:
  explicit SingularSystemError(const std::string& msg) : Error(msg) {}
};

}  // namespace aeromap
