#pragma once

#include <stdexcept>
#include <string>

namespace jdts {

// Base class for all library errors. CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model, family, config, or argument (CLI exit 2).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Point outside the declared domain box.
class DomainViolation : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Quadrature failed to reach the requested tolerance. Carries the best
// estimate and the achieved error bound so callers can decide to proceed.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double estimate, double bound)
      : Error(what), best_estimate(estimate), error_bound(bound) {}
  double best_estimate;
  double error_bound;
};

// An integral's convergence precondition fails (e.g. Laplace transform
// evaluated outside its domain of finiteness).
class DivergentIntegral : public Error {
 public:
  using Error::Error;
};

// The jump-size integral of the curve increment diverges: the jump measure
// violates the finite-moment regularity requirement (CLI exit 5).
class RegularityError : public Error {
 public:
  using Error::Error;
};

// ODE solution left the admissible range before τ_max (CLI exit 3).
class ExplosionError : public Error {
 public:
  ExplosionError(const std::string& what, double tau)
      : Error(what), tau_reached(tau) {}
  double tau_reached;
};

}  // namespace jdts
