#pragma once

#include <stdexcept>
#include <string>

namespace cartan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// g not symmetric positive definite at an evaluated point.
class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

// Vielbein without full column rank.
class DegenerateEmbeddingError : public Error {
 public:
  using Error::Error;
};

// Velocity Hessian of a Lagrangian is singular.
class DegenerateLagrangianError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class InterpolationRangeError : public Error {
 public:
  using Error::Error;
};

// Unknown preset, missing or unexpected parameter, malformed config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cartan
