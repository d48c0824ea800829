#pragma once

#include <stdexcept>
#include <string>

namespace suffmdp {

/// Malformed input: bad shapes, out-of-range values, inconsistent files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not complete, e.g. training that diverged.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace suffmdp
