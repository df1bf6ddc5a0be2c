#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ergodens {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent configuration (bad parameters, empty grids, ...).
/// CLI exit code 2.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Mathematical domain violation (non-positive density, r_min >= r_max/4, ...).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

/// Requested kernel order exceeds the supported range.
class UnsupportedOrderError : public Error {
public:
  explicit UnsupportedOrderError(const std::string& what) : Error(what) {}
};

/// A simulated trajectory left the finite range. CLI exit code 3.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, std::int64_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::int64_t step() const { return step_; }

private:
  std::int64_t step_;
};

/// Bad input data for a statistical routine (non-positive MSE, too few points).
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(what) {}
};

}  // namespace ergodens
