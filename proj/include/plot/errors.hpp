#pragma once

#include <stdexcept>
#include <string>

namespace plot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Riccati iteration did not reach the requested residual.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be factorized is numerically singular.
class Singularity : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two traces that should share a target realization do not.
class RealizationMismatch : public Error {
 public:
  using Error::Error;
};

/// The RLS design matrix lost positive definiteness.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Replayed dynamics or costs disagree with a logged trace.
class ReplayMismatch : public Error {
 public:
  ReplayMismatch(const std::string& what, long row)
      : Error(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

}  // namespace plot
