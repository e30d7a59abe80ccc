#pragma once

#include <stdexcept>
#include <string>

namespace sktlimit {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: a caller asked for something the model does not define.
/// The CLI maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed on otherwise valid input.
/// The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public UsageError {
 public:
  using UsageError::UsageError;
};

class RegimeError : public UsageError {
 public:
  using UsageError::UsageError;
};

class DiscriminantError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// The zero set of h at the requested level does not have the required shape
/// (e.g. fewer than three zeros).
class StateError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

class RootFindingFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoRootError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AssemblyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ContinuationStall : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SignError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NewtonDivergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NegativeDensity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sktlimit
