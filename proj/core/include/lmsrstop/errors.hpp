#pragma once

#include <stdexcept>

namespace lmsrstop {

/// An argument lies outside the domain on which a formula is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A requested grid or simulation size exceeds what the engine will allocate.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An object was used in a state that does not support the request
/// (for example a value-function row that was not retained by the solver).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lmsrstop
