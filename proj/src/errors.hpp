#pragma once

#include <stdexcept>
#include <string>

namespace isodiff {

// Error taxonomy mirrors the process exit-code contract:
// config/usage -> 2, divergence/degenerate numerics -> 3, I/O or corruption -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct CapacityError : Error {
  using Error::Error;
};

struct SingularityError : Error {
  using Error::Error;
};

struct DivergenceError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace isodiff
