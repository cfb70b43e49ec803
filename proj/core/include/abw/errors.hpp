#pragma once

#include <stdexcept>

namespace abw {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite entries, out-of-range parameters, structural violations.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A covariance with an eigenvalue below -tol * ||Sigma||.
class NotPSD : public Error {
 public:
  using Error::Error;
};

// A direction V whose diagonal blocks (V^T L)_{t,t} are not symmetric.
class NotTangent : public Error {
 public:
  using Error::Error;
};

class NotRegular : public Error {
 public:
  using Error::Error;
};

}  // namespace abw
