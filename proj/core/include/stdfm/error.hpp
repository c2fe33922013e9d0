#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stdfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input data (CSV parsing, non-finite values, bad dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A parameter vector outside its family's parameter space.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical integration that could not be carried out.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// The criterion minimization did not converge from any start.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient total derivative of phi; carries the offending null direction.
class IdentifiabilityError : public Error {
 public:
  IdentifiabilityError(const std::string& what, std::vector<double> null_direction)
      : Error(what), null_direction_(std::move(null_direction)) {}

  const std::vector<double>& null_direction() const { return null_direction_; }

 private:
  std::vector<double> null_direction_;
};

/// Covariance matrices that fail symmetric positive semi-definiteness beyond tolerance,
/// or singular matrices where an inverse is required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace stdfm
