#pragma once

#include <stdexcept>
#include <string>

namespace liouville {

// Malformed user input (spec files, flags, points outside the domain).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stated invariant or pre/post condition failed.
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The numerics gave up (step underflow, non-convergence, branch proximity).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace liouville
