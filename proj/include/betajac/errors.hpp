#pragma once

#include <stdexcept>
#include <string>

namespace betajac {

// Bad input: parameters outside the admissible region, malformed configs.
// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to deliver the requested accuracy
// (eigensolver non-convergence, quadrature disagreement, extrapolation
// divergence). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace betajac
