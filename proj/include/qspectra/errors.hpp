// Exception hierarchy shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace qspectra {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (poles, zero arguments, bad q).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series or product hit its term cap before the truncation rule held.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

/// Evaluation point too close to a pole of the Green function or connection coefficients.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Adaptive quadrature exceeded its refinement budget.
class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// Requested eigenvalue range contains no eigenvalue.
class EmptySpectrum : public Error {
 public:
  using Error::Error;
};

/// Truncation window shorter than two sites.
class WindowTooSmall : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue bisection or inverse iteration failed to converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// A finite result is not representable in double precision.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity failed its built-in consistency check.
class ValidationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace qspectra
