#pragma once

#include <stdexcept>
#include <string>

namespace lrf {

/// Shape or dimension disagreement between operands.
class DimError : public std::runtime_error {
 public:
  explicit DimError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid static configuration (even kernel size, bad grid spec, unknown config key, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violation of an internal call contract (non-scalar loss, coordinate outside grid, ...).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user-supplied data (empty sweep list, ground truth outside range, ...).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write failure or malformed on-disk data.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values where finite math is required (exploding loss, NaN gradient).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lrf
