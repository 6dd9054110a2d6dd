#pragma once

#include <stdexcept>
#include <string>

namespace rsmooth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation (mu <= 0, n = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A retraction could not produce a point (rank-deficient or degenerate input).
class RetractionError : public Error {
 public:
  using Error::Error;
};

/// Input matrix has a significantly negative eigenvalue.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// Requested column count is below the numerical rank of the input.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Line search was handed a direction with nonnegative slope.
class NotDescentError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (matrix files, benchmark specs).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rsmooth
