#pragma once

#include <stdexcept>
#include <string>

namespace capdual {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// p <= q, or otherwise outside the p > q regime.
class InvalidExponents : public Error {
 public:
  using Error::Error;
};

/// A = Hess h + h*sigma (or its log-variable analogue) is not positive definite.
class NonConvex : public Error {
 public:
  using Error::Error;
};

class DegenerateBoundary : public Error {
 public:
  using Error::Error;
};

class NotAxisymmetric : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace capdual
