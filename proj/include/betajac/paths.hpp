#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "betajac/model.hpp"

namespace betajac {

// A lattice bridge of length 2k. Odd steps (1st, 3rd, ...) move by 0 or -1,
// even steps by 0 or +1; the increments sum to zero. Each step between
// heights h and h' reads the factor entry B(max(h, h'), min(h, h')).
struct AlternatingBridge {
  std::vector<int> steps;

  int length() const { return static_cast<int>(steps.size()); }
  int horizontal_steps() const;
  bool is_alternating() const;
  // Every height carries an even number of horizontal steps and every
  // level gap m | m+1 is crossed an even number of times.
  bool even_at_every_height() const;
};

struct BridgeSet {
  int k = 0;
  std::vector<AlternatingBridge> bridges;

  std::size_t size() const { return bridges.size(); }
};

constexpr int kMaxBridgeHalfLength = 10;

// All C(2k, k) alternating bridges of length 2k, in lexicographic order of
// the step sequence with -1 < 0 < +1. Throws ValidationError for k > 10.
BridgeSet enumerate_bridges(int k);

// p_k(x, y) = sum_l C(k, l)^2 x^(2l) y^(2(k - l)): the generating polynomial
// of bridges by horizontal (x) and inclined (y) steps.
struct WeightPolynomial {
  int k = 0;
  std::vector<double> coeffs;  // coeffs[l] multiplies x^(2l) y^(2(k-l))

  mpz_class exact_coeff(int l) const;
  double value(double x, double y) const;
  double dx(double x, double y) const;
  double dy(double x, double y) const;
};

WeightPolynomial p_poly(int k);

// tr A^k with A = B B^T as a sum over shifted bridges of entry products.
// Paths that leave rows 1..n contribute nothing. Needs k <= 8.
double trace_via_paths(const TridiagonalFactor& factor, int k);

using ExactRational = mpq_class;

std::string to_string(const ExactRational& q);

// Rational ensemble parameters (alpha = 2/beta, a = 1/(p+q), b = p/(p+q)).
struct RationalParams {
  ExactRational alpha;
  ExactRational a;
  ExactRational b;

  // Accepts "p/q" or decimal-free integer strings for each field.
  static RationalParams parse(const std::string& alpha, const std::string& a,
                              const std::string& b);
  double alpha_d() const { return alpha.get_d(); }
  double a_d() const { return a.get_d(); }
  double b_d() const { return b.get_d(); }
};

// E tr A^k at matrix size n, exactly. Each path contributes a product of
// Beta moments E[z^u (1-z)^v] = (r)_u (s)_v / (r+s)_{u+v}. Needs k <= 5 and
// positive shapes; throws ValidationError otherwise.
ExactRational expected_trace_exact(const RationalParams& params, int n, int k);

// Result of fitting (1/n) E tr A^k = eta0 + eta1/n + ... over a grid.
struct EtaEstimate {
  int k = 0;
  std::vector<int> n_grid;
  ExactRational eta0;
  ExactRational eta1;
  // |difference| between the fit on all levels and the fit that drops the
  // coarsest level; serves as the error estimate.
  double residual0 = 0.0;
  double residual1 = 0.0;
};

// Richardson extrapolation of (1/n) E tr A^k. The grid must be increasing
// with at least three levels; m levels eliminate the 1/n .. 1/n^(m-1) terms.
// Throws NumericalError when the residual of eta1 exceeds max_residual.
EtaEstimate eta_extract(int k, const RationalParams& params, const std::vector<int>& n_grid,
                        double max_residual = 1e-3);

// Geometric grid n0, 2 n0, ..., 2^(levels-1) n0.
std::vector<int> geometric_grid(int n0, int levels);

}  // namespace betajac
