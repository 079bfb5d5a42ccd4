#pragma once

#include <stdexcept>
#include <string>

namespace tontine {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (configuration, parameters, arguments).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Hazard is negative somewhere on the requested age range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The feasibility condition on the consumption price fails.
class InfeasibleScenario : public Error {
 public:
  InfeasibleScenario(const std::string& what, double margin)
      : Error(what), margin_(margin) {}
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

/// Quadrature truncation insufficient, ODE blow-up, root not bracketed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Finite-pool credit rule cannot be applied.
class PoolError : public Error {
 public:
  using Error::Error;
};

}  // namespace tontine
