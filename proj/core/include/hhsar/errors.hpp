#pragma once

#include <stdexcept>
#include <string>

namespace hhsar {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameters, malformed configuration documents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numeric-domain violations: coincident points, delays outside the
/// alias-free window, singular local transforms, failed inversions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A backprojection delay fell outside the range profile window.
class OutOfWindowError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Filesystem and format failures.
class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedPayloadError : public IoError {
 public:
  using IoError::IoError;
};

class DimensionMismatchError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace hhsar
