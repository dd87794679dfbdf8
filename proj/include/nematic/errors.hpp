#pragma once

#include <stdexcept>
#include <string>

namespace nematic {

// Input outside the mathematical domain of an operation.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation ran but produced something unusable (NaN, singular solve, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad command line or config file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nematic
