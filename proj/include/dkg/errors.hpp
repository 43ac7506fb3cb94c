#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "dkg/lattice.hpp"

namespace dkg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidFieldError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// Bad parameter value (e.g. non-positive coupling where d > 0 is required).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// A standing hypothesis on the kink or its spectrum does not hold
/// (for instance an eigenvalue outside the continuous-spectrum gap).
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Base for iterative solvers that failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration ran out of iterations; keeps the last iterate.
class DivergenceError : public ConvergenceError {
 public:
  DivergenceError(const std::string& what, LatticeField last, double residual_norm, int iterations)
      : ConvergenceError(what),
        last_iterate_(std::move(last)),
        residual_norm_(residual_norm),
        iterations_(iterations) {}

  const LatticeField& last_iterate() const { return last_iterate_; }
  double residual_norm() const { return residual_norm_; }
  int iterations() const { return iterations_; }

 private:
  LatticeField last_iterate_;
  double residual_norm_;
  int iterations_;
};

class SingularJacobianError : public ConvergenceError {
 public:
  SingularJacobianError(const std::string& what, std::size_t row, double pivot)
      : ConvergenceError(what), row_(row), pivot_(pivot) {}
  std::size_t row() const { return row_; }
  double pivot() const { return pivot_; }

 private:
  std::size_t row_;
  double pivot_;
};

/// Arclength step collapsed below the minimum.
class StallError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

class EigenConvergenceError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Implicit stage equations of a time step could not be solved.
class StepError : public ConvergenceError {
 public:
  StepError(const std::string& what, int iterations, double last_increment)
      : ConvergenceError(what), iterations_(iterations), last_increment_(last_increment) {}
  int iterations() const { return iterations_; }
  double last_increment() const { return last_increment_; }

 private:
  int iterations_;
  double last_increment_;
};

/// Too few usable samples for a regression, or a degenerate design.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Predicted eigenvalues could not be paired with computed ones.
class MatchingError : public Error {
 public:
  using Error::Error;
};

/// A continuation could not start from the supplied seed.
class SeedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dkg
