#pragma once

#include <stdexcept>
#include <string>

namespace hivelab {

// Bad arguments, broken preconditions, out-of-grid access.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constraint system (or boundary data) with no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver breakdown: pairing failures, non-finite intermediate values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dyadic cell that holds no rhombus of the requested kind at this n.
class DegenerateCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hivelab
