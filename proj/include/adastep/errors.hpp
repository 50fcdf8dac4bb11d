#pragma once

#include <stdexcept>

namespace adastep {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user-supplied coefficient returned a negative (or NaN) value.
class NonNegativityViolation : public Error {
 public:
  using Error::Error;
};

/// A user-supplied diffusion coefficient vanished away from the equilibrium.
class ZeroDiffusionAtNonzero : public Error {
 public:
  using Error::Error;
};

/// The closed-form explosion time requires a strictly positive initial value.
class NonPositiveInitial : public Error {
 public:
  using Error::Error;
};

/// A state passed to a step computation was NaN or infinite.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// A coefficient magnitude left the representable integer range (2^63).
class Overflow : public Error {
 public:
  using Error::Error;
};

/// A Wiener increment was requested over a non-positive interval.
class NonPositiveStep : public Error {
 public:
  using Error::Error;
};

/// An argument fell outside the mathematical domain of the function.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// A simulation or experiment configuration failed validation.
class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

/// A file or directory could not be created, read, or written.
class IoFailure : public Error {
 public:
  using Error::Error;
};

/// A runtime invariant (such as the step-bound estimates) was violated.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace adastep
