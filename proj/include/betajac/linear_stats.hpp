#pragma once

#include <vector>

#include "betajac/eig.hpp"
#include "betajac/model.hpp"
#include "betajac/spectral.hpp"

namespace betajac {

// Highest polynomial degree evaluated through power traces.
constexpr int kMaxPowerTraceDegree = 12;

// True when every function is a polynomial of degree <= kMaxPowerTraceDegree,
// so tr f(A) can be formed from tr A^k without diagonalizing.
bool power_trace_eligible(const std::vector<TestFunction>& funcs);

// tr f(A) for each function: power traces when eligible, otherwise
// eigenvalues followed by pairwise summation. Eigensolver failures propagate.
std::vector<double> linear_statistics(const SymTridiagonal& a, const std::vector<TestFunction>& funcs,
                                      const EigOptions& options = {});

// x -> f'(x)^2, kept polynomial (with coefficients) when f is one.
TestFunction derivative_square(const TestFunction& f);

}  // namespace betajac
