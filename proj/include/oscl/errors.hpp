#pragma once

#include <stdexcept>
#include <string>

namespace oscl {

// Bad inputs: malformed configs, shape mismatches, parameters out of range.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Mathematically undefined request on otherwise valid data
// (e.g. conditioning on a zero-probability symbol).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown at runtime (zero reference density at a sampled
// point, overflow in a mixture sum).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oscl
