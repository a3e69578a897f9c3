#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace defiperf {

/// Raised when an argument violates an operation's mathematical precondition
/// (non-prime modulus, gcd(a, m) != 1, q == p, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a stored record fails an independent recomputation.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a subtree specification admits no completion at all.
class ContradictionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace defiperf
