#pragma once

#include <stdexcept>
#include <string>

namespace hbi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (non-positive
// variance, infinite marginal mean, unsupported closed form, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// ODE step failure, infeasible hyperparameter matching, non-finite state.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or malformed input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hbi
