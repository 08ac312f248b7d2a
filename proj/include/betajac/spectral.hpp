#pragma once

#include <functional>
#include <string>
#include <vector>

#include "betajac/params.hpp"

namespace betajac {

struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;  // may be empty
  std::string tag;
  // Set for functions outside the smoothness class of the CLT (piecewise
  // linear); results for them are reported but not compared to theory.
  bool outside_hypotheses = false;
  // Degree when the function is a polynomial, otherwise -1. Lets callers
  // evaluate linear statistics through power traces.
  int polynomial_degree = -1;
  std::vector<double> monomial_coeffs;  // x^0 .. x^degree when polynomial

  double operator()(double x) const { return value(x); }
  bool has_derivative() const { return static_cast<bool>(derivative); }
};

namespace functions {

TestFunction constant(double c);
TestFunction monomial(int k);  // k <= 12
TestFunction polynomial(std::vector<double> coeffs, std::string tag);
TestFunction gamma(int n, const SupportInterval& support);
TestFunction exponential(double rate = 1.0);
TestFunction sine(double frequency = 1.0);
// Linear interpolation through (knots[i], heights[i]); flagged.
TestFunction piecewise_linear(std::vector<double> knots, std::vector<double> heights);

// Names accepted on the command line: const, x, x<k>, gamma<n>, exp, sin,
// pwl. Ranges such as gamma1..gamma4 are expanded by the CLI.
TestFunction by_name(const std::string& name, const SupportInterval& support);

}  // namespace functions

// Largest |f' - central difference| / max(1, |f'|) over a probe grid of
// [0, 1]; infinity when no derivative is attached.
double derivative_mismatch(const TestFunction& f, int probes = 101, double h = 1e-6);

constexpr int kDefaultThetaNodes = 2048;

// Integral against the limiting density
// sqrt((lambda_+ - x)(x - lambda_-)) / (2 pi a x (1 - x)), in theta
// coordinates x = c + r cos(theta).
double integrate_mu(const TestFunction& f, const AsymptoticParams& asym,
                    int nodes = kDefaultThetaNodes);

// Signed deviation measure: point masses 1/4 at both edges minus half the
// arcsine law on the support.
double integrate_nu(const TestFunction& f, const SupportInterval& support,
                    int nodes = kDefaultThetaNodes);

// Gamma_n(x) = 2 T_n((x - c)/r).
double cheb_gamma(int n, double x, const SupportInterval& support);

struct ChebyshevCoefficients {
  std::vector<double> fhat;  // fhat[0] is the theta-average (coefficient of Gamma_0 / 2)
  int N = 0;
  int nodes = 0;
};

// fhat[n] = (1/pi) int_0^pi f(c + r cos t) cos(n t) dt, n = 0..N.
ChebyshevCoefficients cheb_coeffs(const TestFunction& f, int N, const SupportInterval& support,
                                  int nodes = kDefaultThetaNodes);

struct VarianceFunctionals {
  double sigma_sq = 0.0;  // (2/beta) sum n fhat[n]^2
  double tau_sq = 0.0;    // sum n^2 fhat[n]^2
  double tail_estimate = 0.0;  // size of n^2 fhat[n]^2 over the last tenth of the range
  bool non_decaying = false;   // coefficients have not decayed by N
  int N = 0;
};

VarianceFunctionals variance_functionals(const TestFunction& f, int N, double beta,
                                         const SupportInterval& support,
                                         int nodes = kDefaultThetaNodes);

// (1/(2 pi)) int f'(x)^2 sqrt((lambda_+ - x)(x - lambda_-)) dx, the
// derivative form of tau^2.
double tau_sq_direct(const TestFunction& f, const SupportInterval& support,
                     int nodes = kDefaultThetaNodes);

struct StieltjesPair {
  double m0 = 0.0;
  double m1 = 0.0;
};

// Leading and 1/n terms of x -> (1/n) E tr (x - A)^{-1} outside the support.
StieltjesPair stieltjes_pair(double x, const AsymptoticParams& asym);

// Roots in (0, 1) of the degree-n orthogonal polynomial for the weight
// t^r (1-t)^s, ascending (Golub-Welsch).
std::vector<double> jacobi_roots(int n, double r, double s);

// Exponents of the Jacobi polynomial whose roots model the ensemble at
// alpha = 0: r = n (b/a - 1), s = n ((1 - b)/a - 1).
std::pair<double, double> zero_temperature_exponents(int n, const AsymptoticParams& asym);

}  // namespace betajac
