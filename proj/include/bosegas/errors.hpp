#pragma once

#include <stdexcept>

namespace bosegas {

// Invalid input: parameter outside the admissible domain of an operation.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative method failed to reach its target (bracket not found,
// iteration cap hit, no stationary point).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bosegas
