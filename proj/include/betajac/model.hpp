#pragma once

#include <iosfwd>
#include <vector>

#include "betajac/params.hpp"
#include "betajac/rng.hpp"

namespace betajac {

struct BetaSpec {
  double shape1;
  double shape2;

  double mean() const { return shape1 / (shape1 + shape2); }
  double variance() const {
    const double t = shape1 + shape2;
    return shape1 * shape2 / (t * t * (t + 1.0));
  }
};

// Gamma(shape, 1) by Marsaglia-Tsang squeeze/rejection. Shapes below one are
// boosted: G(a) = G(a + 1) U^(1/a). Returned as a logarithm so tiny shapes
// cannot underflow.
double log_gamma_sample(double shape, Stream& rng);

// One Beta(shape1, shape2) draw as X / (X + Y) with independent Gammas.
double beta_sample(const BetaSpec& spec, Stream& rng);

// Shapes of the squared matrix-model variables (1-based indices):
//   c_i^2  ~ Beta(beta/2 (n1 - n + i), beta/2 (n2 - n + i)),        i = 1..n
//   c'_j^2 ~ Beta(beta/2 j, beta/2 (n1 + n2 - 2n + 1 + j)),           j = 1..n-1
BetaSpec c_shape(const EnsembleParams& params, int i);
BetaSpec cprime_shape(const EnsembleParams& params, int j);

// The lower-bidiagonal factor B. raw_c[i-1] = c_i^2, raw_cp[j-1] = (c'_j)^2.
// Row k (1-based) holds diag d_k = c_{n-k+1} s'_{n-k} (s'_0 = 1) and, for
// k >= 2, the subdiagonal B_{k,k-1} = -s_{n-k+1} c'_{n-k+1}. sub[k-1] stores
// B_{k+1,k} = -s_{n-k} c'_{n-k}.
struct TridiagonalFactor {
  std::vector<double> raw_c;
  std::vector<double> raw_cp;
  std::vector<double> diag;
  std::vector<double> sub;

  static TridiagonalFactor from_raw(std::vector<double> raw_c, std::vector<double> raw_cp);

  int size() const { return static_cast<int>(diag.size()); }
  // 1-based matrix entry B_{row,col}; zero outside the bidiagonal band.
  double entry(int row, int col) const;
};

// Compact symmetric tridiagonal matrix.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  int size() const { return static_cast<int>(diag.size()); }
  double trace() const;
  double frobenius_sq() const;
};

TridiagonalFactor sample_factor(const EnsembleParams& params, const ReplicateStreams& streams);

// A = B B^T: A_kk = d_k^2 + e_{k-1}^2, A_{k,k+1} = d_k e_k.
SymTridiagonal assemble_gram(const TridiagonalFactor& factor);

// Every Beta(x, y) replaced by its mean x / (x + y).
TridiagonalFactor deterministic_factor(const EnsembleParams& params);

// tr A^k for k = 0..kmax by banded powers, O(n kmax^2).
std::vector<double> power_traces(const SymTridiagonal& a, int kmax);

// tr A straight from the raw draws, without forming any square root.
double gram_trace(const TridiagonalFactor& factor);

// Debug dump: index, raw_c, raw_cp, d, e (empty cell where undefined).
void write_factor_csv(std::ostream& out, const TridiagonalFactor& factor);

}  // namespace betajac
