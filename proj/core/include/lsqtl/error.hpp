#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsqtl {

// Argument outside the mathematical domain of an operation (sigma <= 0,
// angle outside [-pi, pi], d <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Structurally invalid input: empty anchoring groups, mismatched tables.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Data that cannot support the requested fit, e.g. a constant pooled sample.
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature or iterative solver failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a dataset invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lsqtl
