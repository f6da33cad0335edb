#pragma once

#include <stdexcept>
#include <string>

namespace aclock {

/// Invalid arguments or configuration values.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature, differentiation or posterior evaluation failed to meet its
/// accuracy target.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A model object violates its own invariants (e.g. probabilities do not
/// sum to one, POVM not complete).
class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The feedback loop diverged past its guard.
class InstabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace aclock
