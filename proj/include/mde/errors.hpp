#pragma once

#include <stdexcept>
#include <string>

namespace mde {

/// Operand dimensions do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the domain of an operation, e.g. not in the upper half-plane.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition of an operation is violated.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative numerical kernel failed (eigensolver sweep cap, non-finite values).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Dyson fixed-point iteration exhausted its iteration budget.
class NonConvergence : public NumericFailure {
 public:
  NonConvergence(const std::string& what, double last_residual, int iterations)
      : NumericFailure(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

}  // namespace mde
