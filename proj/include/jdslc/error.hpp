#pragma once

#include <stdexcept>
#include <string>

namespace jdslc {

/// Bad user input: malformed tables, out-of-range parameters, inadmissible
/// distortion budgets. The CLI maps this to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not finish: a solver that did not converge, a
/// search that could not bracket its target. The CLI maps this to exit code 3.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jdslc
