#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bstab {

/// Bad user input: scenario files, parameter ranges, CLI misuse.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver-level failure: singular factorizations, stagnation, blow-up.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergence : NumericalError {
  NonConvergence(const std::string& msg, std::vector<double> residuals = {})
      : NumericalError(msg), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

struct ArnoldiStagnation : NumericalError {
  using NumericalError::NumericalError;
};

struct FactorizationSingular : NumericalError {
  using NumericalError::NumericalError;
};

struct GramIllConditioned : NumericalError {
  GramIllConditioned(const std::string& msg, double cond) : NumericalError(msg), condition(cond) {}
  double condition;
};

struct PolePlacementFailed : NumericalError {
  using NumericalError::NumericalError;
};

struct GammaOutOfRange : ConfigError {
  using ConfigError::ConfigError;
};

struct CflViolation : ConfigError {
  using ConfigError::ConfigError;
};

/// Cross-check between two independent computations disagreed.
struct VerificationMismatch : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace bstab
