#pragma once
#include <iostream>
#include <stdexcept>
#include <string>

namespace pol {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// r_b undefined, negative arguments, and similar out-of-domain calls.
struct DomainError : Error {
  using Error::Error;
};

// Parameters outside the window where the adiabatic model holds.
struct ValidityError : Error {
  using Error::Error;
};

// Root not bracketed, fit residual too large, orthogonality failure.
struct ConvergenceError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

inline bool& warnings_enabled() {
  static bool on = true;
  return on;
}

inline void warn(const std::string& msg) {
  if (warnings_enabled()) std::clog << "warning: " << msg << '\n';
}

}  // namespace pol
