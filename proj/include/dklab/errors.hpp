#pragma once

#include <stdexcept>

namespace dklab {

/// Invalid argument to a constructor or operation (non-positive width, negative time, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical result left its mathematical domain, e.g. a non-positive argument of ln.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested capability is not provided (derivative order > 2, quadrature above d = 3).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked precondition on the inputs failed (sign, ordering, padding).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural invariant of an input object was found violated.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dklab
