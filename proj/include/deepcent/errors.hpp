#pragma once

#include <stdexcept>

namespace deepcent {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// configuration/usage -> 1, data/shape -> 2, numeric/training -> 3.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace deepcent
