#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Invalid or inconsistent user configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Root finding failed (no bracket, no convergence). CLI exit code 3.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical integration failed to converge. CLI exit code 4.
struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), last_estimate(estimate), last_error_bound(error_bound) {}
  double last_estimate = 0.0;
  double last_error_bound = 0.0;
};

}  // namespace spdc
