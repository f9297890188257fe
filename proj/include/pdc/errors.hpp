#pragma once

#include <stdexcept>
#include <string>

namespace pdc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero-norm vectors, vanishing visibility denominators and similar.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent setup: non-orthogonal pump axes, a single analyzer, ...
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Data that cannot constrain the requested fit.
class IllPosedFitError : public Error {
 public:
  using Error::Error;
};

/// Non-finite model output or malformed numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdc
