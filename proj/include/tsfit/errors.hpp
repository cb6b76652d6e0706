#pragma once

#include <stdexcept>
#include <string>

namespace tsfit {

// Invalid inputs: bad orders, mismatched dimensions, violated preconditions.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failures: eigensolver non-convergence, degenerate recursions.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A moment (block-Toeplitz or innovation) matrix is singular or too ill
// conditioned to solve. Carries the order at which the failure occurred and
// a condition estimate when one is available.
class SingularMomentMatrix : public NumericalError {
 public:
  SingularMomentMatrix(const std::string& what, int order, double condition)
      : NumericalError(what), order_(order), condition_(condition) {}
  int order() const { return order_; }
  double condition() const { return condition_; }

 private:
  int order_;
  double condition_;
};

// A kernel's half-width exceeds the layout padding: the estimator is not
// weak-memory for this layout and would need cross-partition reads.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// CSV / file ingestion problems; message carries row/column context.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsfit
