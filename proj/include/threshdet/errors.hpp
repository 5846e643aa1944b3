#pragma once

#include <stdexcept>
#include <string>

namespace threshdet {

/// Base class for all library-thrown errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An asymptotic formula was requested outside its validity regime.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// An operation was applied to a model kind it does not support.
class MisuseError : public Error {
 public:
  using Error::Error;
};

/// A requested limit does not exist (or is not usable) for the given model.
class LimitUndefinedError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge; the message carries diagnostics.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An internal cross-check failed: a result is inconsistent beyond its own
/// error bound. Indicates a bug, not bad input.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-facing configuration (config files, plans, CLI input).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace threshdet
