#pragma once

#include <stdexcept>
#include <string>

namespace antroute {

// Bad generator or configuration arguments.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input that violates a structural invariant (disconnected graph,
// self-link, duplicate link, mismatched tables).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed topology / table file. Carries the 1-based offending line.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Bookkeeping invariant broken inside the simulator (a bug, not bad input).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Argument outside the validity regime of an analytic formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace antroute
