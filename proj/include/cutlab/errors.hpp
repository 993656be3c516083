#pragma once

#include <stdexcept>
#include <string>

namespace cutlab {

/// Argument lies outside the function's domain (e.g. a point outside [0,1]).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Requested norm does not exist for the kernel (alpha * p >= 1).
struct IntegrabilityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Problem size exceeds an enumeration or memory guard.
struct SizeError : std::length_error {
  using std::length_error::length_error;
};

/// A parameter constraint is violated; the message names the inequality.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation not available for the given kernel family.
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Invalid experiment configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace cutlab
