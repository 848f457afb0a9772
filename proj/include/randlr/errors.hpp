#pragma once

#include <stdexcept>
#include <string>

namespace randlr {

/// Malformed or inadmissible configuration (parameter outside its range,
/// epsilon outside the neighbourhood V, unknown kind, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical hypothesis (expansion, spectral gap, ...) does not hold
/// for the configured system. This is a property of the model, not a
/// solver failure.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(const std::string& what, double measured)
      : std::runtime_error(what), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

/// Solver failure: root finder, quadrature or linear solve did not reach
/// its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace randlr
