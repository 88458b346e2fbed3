// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hierprec {

// Invalid or inconsistent user-supplied parameters (dimensions, powers, CSI qualities).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operand shapes do not match the network dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix that must be Hermitian positive definite is not, or a result is non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precoder handed to rate evaluation violates a per-TX power budget.
class PowerViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing an experiment file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hierprec
