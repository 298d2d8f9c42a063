#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace obslab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid geometry is unusable (too few nodes, empty box, non-uniform spacing).
class InvalidGridError : public Error {
 public:
  using Error::Error;
};

/// Two fields or a field and a problem live on different grids.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A query point or ball leaves the grid box.
class OutOfDomainError : public Error {
 public:
  using Error::Error;
};

/// A radius is too small relative to the grid spacing for the requested
/// quadrature or rescaling to be meaningful.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A direction vector that was required to be a unit vector is not.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// A quadratic form is not in the admissible blow-up class
/// (symmetric, nonnegative definite, unit trace).
class MembershipError : public Error {
 public:
  using Error::Error;
};

/// A fixture parameter is outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An obstacle problem or solver configuration violates its invariants.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A field handed to a normalized-form diagnostic has negative values.
class NotNormalizedSolutionError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver hit max_iterations before reaching the tolerance.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

/// Malformed or unreadable input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace obslab
