#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace traction {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed configuration, out-of-range parameter, wrong
/// normalization. Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical method failed to reach its tolerance. Carries the residual
/// history when one exists.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what,
                       std::vector<double> residual_history = {})
      : Error(what), history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// The loads violate a compatibility condition required by the requested
/// computation (nonzero resultant or moment, or positive work on a rotation).
class IncompatibleLoadsError : public Error {
 public:
  using Error::Error;
};

}  // namespace traction
