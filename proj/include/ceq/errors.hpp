#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ceq {

// Base for everything the toolkit throws on purpose. The CLI maps
// ValidationError to exit status 2 and the rest to exit status 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Carries the (time, value) trace that failed to fit.
class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  FitError(const std::string& what, std::vector<double> t, std::vector<double> y)
      : NumericalError(what), times(std::move(t)), values(std::move(y)) {}

  std::vector<double> times;
  std::vector<double> values;
};

class ExtractionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ChannelUnsupportedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ceq
