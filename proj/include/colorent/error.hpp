#pragma once

#include <stdexcept>
#include <string>

namespace colorent {

/// Caller passed arguments outside an operation's precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state violates the unit-norm or finiteness invariant.
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver stopped before reaching tolerance.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Requested inverse temperature sits on or past the symmetric-branch instability.
class CriticalityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace colorent
