#pragma once

#include <stdexcept>
#include <string>

namespace hyperdpp {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (bad radius, point
/// outside the disk, malformed tree word, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// User-supplied data (kernel tables, run configuration) failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not certify its result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class KernelImplementationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateKernelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class HaloTooSmallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonintegrableTailError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DiscretizationTooCoarseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hyperdpp
