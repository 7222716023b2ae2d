#ifndef ICTS_ERROR_HPP
#define ICTS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace icts {

/// Base class for every error thrown by the library. `exit_code()` maps the
/// error onto the CLI's process exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or inconsistent input: bad CSV rows, invalid configuration,
/// parameters outside their declared support.
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A parameter outside the mathematical domain of an operation.
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// The sampler exhausted its block budget before meeting its diagnostics.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Non-positive forecast variance, failed factorisation and similar.
/// Carries the time index at which it happened (0 when not applicable).
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, long time_index = 0)
      : Error(what), time_index_(time_index) {}
  long time_index() const noexcept { return time_index_; }
  int exit_code() const noexcept override { return 4; }

 private:
  long time_index_;
};

/// A convergence diagnostic that is mathematically undefined for its input
/// (for example zero within-chain variance).
class DiagnosticUndefined : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace icts

#endif  // ICTS_ERROR_HPP
