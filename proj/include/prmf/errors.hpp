#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prmf {

// Caller passed something that violates a precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A factorization or domain check failed (e.g. non-PD matrix in a log-determinant).
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterate became non-finite. `phase` is "sgd" or "admm"; `step` is the
// rating index (sgd) or ADMM iteration (admm) where it happened.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string phase, long step, const std::string& what)
      : std::runtime_error(phase + " diverged at step " + std::to_string(step) + ": " + what),
        phase_(std::move(phase)),
        step_(step) {}

  const std::string& phase() const noexcept { return phase_; }
  long step() const noexcept { return step_; }

 private:
  std::string phase_;
  long step_;
};

}  // namespace prmf
