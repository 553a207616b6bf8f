#pragma once

#include <stdexcept>
#include <string>

namespace saabo {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (e.g. u ∉ (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mismatched matrix shapes, including base samples that do not fit the
/// candidate set they are asked to transport.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed after exhausting the jitter schedule.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// Training kernel matrix could not be factorized.
class SingularKernelError : public NotPsdError {
 public:
  using NotPsdError::NotPsdError;
};

/// Invalid user-supplied configuration (CLI documents, option structs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical optimization could not produce any usable result.
class OptimizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace saabo
