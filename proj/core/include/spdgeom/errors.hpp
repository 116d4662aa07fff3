#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdgeom {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or layout mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (bad metric parameters, zero power, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A mathematical operation was evaluated outside its domain
/// (log of a nonpositive value, exponential map outside the cone, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A direction vector required to be nonzero was (numerically) zero.
class DegenerateDirectionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Cholesky factorization hit a nonpositive pivot.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(const std::string& what, int pivot)
      : Error(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

/// An iterative kernel failed to converge or an intermediate quantity
/// became unusable. Carries the residual (or condition estimate) observed.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The requested family/parameter combination has no implemented closed form.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A Riemannian SGD update would have left the SPD cone.
class StepRejectedError : public Error {
 public:
  StepRejectedError(const std::string& what, double offending_eigenvalue)
      : Error(what), eig_(offending_eigenvalue) {}
  double offending_eigenvalue() const { return eig_; }

 private:
  double eig_;
};

/// Matrices required to commute do not (within tolerance).
class NonCommutingError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. line() is 1-based for text, byte offset for binary.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spdgeom
