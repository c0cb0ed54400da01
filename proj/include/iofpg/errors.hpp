#pragma once

#include <stdexcept>
#include <string>

namespace iofpg {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not match the operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the operation's mathematical domain
/// (asymmetric weight, non-PD covariance, non-positive radius, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix failed a required rank condition.
class RankError : public Error {
 public:
  RankError(const std::string& what, double offending_sv)
      : Error(what), offending_singular_value(offending_sv) {}
  double offending_singular_value;
};

/// A closed loop (or open loop where required) is not Schur stable.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double rho)
      : Error(what), spectral_radius(rho) {}
  double spectral_radius;
};

/// An iterative method failed to converge.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iterations = -1)
      : Error(what), iterations(iterations) {}
  long iterations;
};

/// The system violates a standing assumption (controllability/observability).
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// A matrix is too ill-conditioned for the requested transform.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Random generation exhausted its rejection-sampling budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// A gradient step produced an unstable gain (caller may shrink the step).
class StepRejectedError : public Error {
 public:
  StepRejectedError(const std::string& what, double rho)
      : Error(what), spectral_radius(rho) {}
  double spectral_radius;
};

/// Bad experiment/CLI configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace iofpg
