#pragma once

#include <stdexcept>
#include <string>

namespace exm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: empty samples, wrong space kind, p < 1, mismatched m.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An enumeration or solver instance exceeds its configured budget.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Bad experiment/model configuration (including excessive truncation residual).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested operation has no exact implementation for this model/space.
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace exm
