#pragma once

#include <stdexcept>
#include <string>

namespace kdvlab {

// Config file / schema violations. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A backend was asked for an operation it does not advertise.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid mathematical input (negative action, coefficients out of range, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested spectral quantity is not resolvable at the configured
// discretization (gap ordering broken, too many gaps requested, ...).
struct SpectralResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solver-level failure that is not a config problem. CLI maps this to exit 3.
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kdvlab
