#pragma once

#include <stdexcept>
#include <string>

namespace alignflow {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidFieldError : public Error {
 public:
  using Error::Error;
};

class AsymmetryError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A field that must integrate to zero (θ, G) does not.
class MeanViolationError : public Error {
 public:
  using Error::Error;
};

/// Density dropped to (numerical) vacuum.
class VacuumError : public Error {
 public:
  using Error::Error;
};

/// A quadrature did not reach its requested accuracy.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

}  // namespace alignflow
