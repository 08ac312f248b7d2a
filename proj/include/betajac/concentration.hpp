#pragma once

#include <cstdint>

#include "betajac/params.hpp"
#include "betajac/spectral.hpp"

namespace betajac {

// variance <= bound is the inequality under test. Standard errors are zero
// for quadrature results and Monte Carlo errors otherwise.
struct PoincareReport {
  double variance = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // variance / bound; 0 when both vanish
  double variance_se = 0.0;
  double bound_se = 0.0;
  int replicates = 0;
  int nodes = 0;

  // (bound - variance) in units of the combined standard error.
  double margin_in_se() const;
  // variance + k se < bound, with se the combined standard error.
  bool holds_with_margin(double k) const;
};

constexpr int kDefaultBetaNodes = 96;

// Y ~ Beta(p, q). Unweighted: Var f(Y) against E f'(Y)^2 / (4(p + q)).
// Weighted: X = 2Y - 1 and Var f(X) against E[(1 - X^2) f'(X)^2] / (p + q),
// which is tight for linear f. Gauss rules for the Beta weight absorb the
// endpoint singularities when p or q is below one.
PoincareReport beta_poincare_ratio(double p, double q, const TestFunction& f, bool weighted,
                                   int nodes = kDefaultBetaNodes);

// Monte Carlo Var tr f(A) against
// alpha / (4 n min(b/a - 1, (1 - b)/a - 1)) * E sum_i f'(lambda_i)^2.
// Requires p, q > 1.
PoincareReport jacobi_poincare_check(const EnsembleParams& params, const TestFunction& f,
                                     int replicates, std::uint64_t seed, int threads = 0);

// The prefactor above; throws ValidationError for p <= 1 or q <= 1.
double jacobi_poincare_prefactor(const EnsembleParams& params);

constexpr int kDefaultCouplingNodes = 96;

// Y = sqrt(Beta(np, nq)), mu = sqrt(p/(p+q)), sigma = sqrt(q) / (2(p+q) sqrt(n)).
// E(Y - mu - sigma X)^2 with X standard normal and Y = F_Y^{-1}(Phi(X)), the
// comonotone coupling. Requires n > max(1/p, 1/q).
double coupling_gap(double n, double p, double q, int nodes = kDefaultCouplingNodes);

// The same expectation with X independent of Y: E(Y - mu)^2 + sigma^2.
double independent_coupling_gap(double n, double p, double q);

}  // namespace betajac
