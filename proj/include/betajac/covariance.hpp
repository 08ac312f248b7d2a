#pragma once

#include <vector>

#include "betajac/params.hpp"

namespace betajac {

struct XY {
  double x = 0.0;
  double y = 0.0;
};

// x = sqrt((b + s)(1 - a + s)) / (1 + 2s), y = sqrt((1 - b + s)(a + s)) / (1 + 2s)
// for s in [-a, 0].
XY xy_of_sigma(double sigma, const AsymptoticParams& asym);

constexpr int kDefaultCovarianceNodes = 200;

struct QuadratureEstimate {
  double value = 0.0;
  double error = 0.0;  // |value(nodes) - value(2 nodes)|
};

// Limiting covariance of the centred traces of A^k and A^l by Gauss-Legendre
// over s in [-a, 0]. The estimate compares against a doubled rule.
QuadratureEstimate covariance_entry_estimate(int k, int l, const AsymptoticParams& asym,
                                             int nodes = kDefaultCovarianceNodes);

// Same, throwing NumericalError when the doubling check disagrees by more
// than 1e-10 relative to the entry scale.
double covariance_entry(int k, int l, const AsymptoticParams& asym,
                        int nodes = kDefaultCovarianceNodes);

struct CovarianceMatrix {
  int K = 0;
  std::vector<std::vector<double>> entries;  // entries[k-1][l-1]
  int quadrature_nodes = 0;                  // 0 for closed-form matrices
  double error_estimate = 0.0;
  double conditioning = 1.0;  // 1/(1 - 2a)

  double at(int k, int l) const { return entries[k - 1][l - 1]; }
  double smallest_eigenvalue() const;
};

// C_{k,l} for 1 <= k, l <= K by quadrature.
CovarianceMatrix covariance_matrix(int K, const AsymptoticParams& asym,
                                   int nodes = kDefaultCovarianceNodes);

struct BasisChange {
  int N = 0;
  std::vector<std::vector<double>> L;  // L[n][k]: coefficient of Gamma_k in x^n

  // sum_k L[n][k] Gamma_k(x)
  double reconstruct(int n, double x, const SupportInterval& support) const;
};

// Built from x Gamma_0 = c Gamma_0 + r Gamma_1 and
// x Gamma_k = c Gamma_k + (r/2)(Gamma_{k+1} + Gamma_{k-1}). N <= 64.
BasisChange basis_L(int N, const SupportInterval& support);

// alpha (L Lambda L^T)_{k,l}, Lambda = diag(0, 1, 2, ...), k, l = 1..K <= 32.
CovarianceMatrix theory_covariance(int K, double beta, const SupportInterval& support);

struct LaplacePair {
  double c_form = 0.0;
  double t_form = 0.0;
};

// Closed forms of the double transform of the limiting covariance; needs
// eta, omega > lambda_+.
LaplacePair laplace_closed(double eta, double omega, const SupportInterval& support, double beta);

// sum_{k,l=1}^{K} C_{k,l} eta^{-k-1} omega^{-l-1}
double laplace_partial_sum(int K, double eta, double omega, const CovarianceMatrix& cov);

}  // namespace betajac
