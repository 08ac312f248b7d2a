#pragma once

#include <functional>
#include <vector>

namespace betajac {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  double integrate(const std::function<double(double)>& f) const;
};

// Gauss rule from the three-term recurrence of the monic orthogonal
// polynomials: x p_k = p_{k+1} + diag[k] p_k + off[k-1]^2 p_{k-1}.
// Nodes are eigenvalues of the Jacobi matrix; weights come from the
// Christoffel function w_i = mass / sum_k phat_k(x_i)^2.
QuadratureRule gauss_from_recurrence(const std::vector<double>& diag, const std::vector<double>& off,
                                     double mass);

// Symmetric Jacobi matrix for weight t^r (1-t)^s on [0, 1], size n.
void jacobi01_recurrence(int n, double r, double s, std::vector<double>& diag,
                         std::vector<double>& off);

// Gauss-Legendre on [lo, hi].
QuadratureRule gauss_legendre(int n, double lo, double hi);

// Gauss rule for the Beta(p, q) probability law on [0, 1].
QuadratureRule gauss_beta(int n, double p, double q);

// Gauss-Hermite for the standard normal law (weights sum to one).
QuadratureRule gauss_hermite_normal(int n);

// Midpoint nodes theta_j = (j + 1/2) pi / m on [0, pi]. For even 2pi-periodic
// integrands this is the periodic trapezoid rule and converges spectrally.
std::vector<double> theta_nodes(int m);

// Pairwise (cascade) summation; order-independent up to the tree shape.
double pairwise_sum(const std::vector<double>& values);

}  // namespace betajac
