#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qgx {

// Every failure raised by the library derives from one of the std exception
// roots so callers can catch broadly or by kind.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values where a finite number is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied object broke a documented contract (e.g. a process that
// looks into the future).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SolverDiverged : public std::runtime_error {
 public:
  SolverDiverged(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// The a priori sup-norm bound of the solution was exceeded.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridTooCoarse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace qgx
