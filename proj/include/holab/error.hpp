#pragma once

#include <stdexcept>
#include <string>

namespace holab {

/// Bad input from the caller: invalid configuration, unknown keys, bad flags.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data or model files that cannot be used: corrupt, truncated, mismatched.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace holab
