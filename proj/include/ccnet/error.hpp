#pragma once

#include <stdexcept>
#include <string>

namespace ccnet {

// Malformed or out-of-contract input: bad files, bad shapes, bad flags.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric breakdown mid-computation (non-finite loss or gradient).
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ccnet
