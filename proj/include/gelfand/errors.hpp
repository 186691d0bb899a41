#pragma once

#include <stdexcept>
#include <string>

namespace gelfand {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside the admissible range (operator exponents, family
// parameters, out-of-range arguments).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A configuration file or command line could not be interpreted.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

class EvalError : public NumericError {
 public:
  using NumericError::NumericError;
};

class BlowupError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ToleranceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class BracketError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SeedError : public NumericError {
 public:
  using NumericError::NumericError;
};

class FitError : public NumericError {
 public:
  using NumericError::NumericError;
};

class TailError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DomainExitError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace gelfand
