#include "betajac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "betajac/eig.hpp"
#include "betajac/errors.hpp"
#include "betajac/quadrature.hpp"

namespace betajac {

namespace functions {

TestFunction constant(double c) {
  std::ostringstream tag;
  tag << "const(" << c << ")";
  return {[c](double) { return c; }, [](double) { return 0.0; }, tag.str(), false, 0, {c}};
}

TestFunction polynomial(std::vector<double> coeffs, std::string tag) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  const int degree = static_cast<int>(coeffs.size()) - 1;
  auto value = [coeffs](double x) {
    double s = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * x + *it;
    return s;
  };
  auto derivative = [coeffs](double x) {
    double s = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) s = s * x + static_cast<double>(k) * coeffs[k];
    return s;
  };
  return {value, derivative, std::move(tag), false, degree, std::move(coeffs)};
}

TestFunction monomial(int k) {
  if (k < 0 || k > 12) throw ValidationError("monomial test functions go up to degree 12");
  std::vector<double> coeffs(k + 1, 0.0);
  coeffs[k] = 1.0;
  return polynomial(std::move(coeffs), k == 1 ? "x" : "x" + std::to_string(k));
}

TestFunction gamma(int n, const SupportInterval& support) {
  if (n < 0) throw ValidationError("Chebyshev index must be nonnegative");
  // Monomial coefficients of 2 T_n((x - c)/r), built by the recurrence on
  // coefficient vectors.
  const double c = support.center(), r = support.half_width();
  std::vector<double> t0{1.0}, t1{-c / r, 1.0 / r};
  std::vector<double> tn = n == 0 ? t0 : t1;
  for (int k = 2; k <= n; ++k) {
    std::vector<double> next(k + 1, 0.0);
    // T_{k} = 2 u T_{k-1} - T_{k-2}, u = (x - c)/r
    for (std::size_t i = 0; i < t1.size(); ++i) {
      next[i + 1] += 2.0 * t1[i] / r;
      next[i] -= 2.0 * c * t1[i] / r;
    }
    for (std::size_t i = 0; i < t0.size(); ++i) next[i] -= t0[i];
    t0 = std::move(t1);
    t1 = next;
    tn = std::move(next);
  }
  for (auto& v : tn) v *= 2.0;
  TestFunction f = polynomial(std::move(tn), "gamma" + std::to_string(n));
  // Evaluate through the recurrence, which is stable where the expanded
  // coefficients are not.
  f.value = [n, support](double x) { return cheb_gamma(n, x, support); };
  f.derivative = [n, support](double x) {
    // Gamma_n' = 2 n U_{n-1}(u) / r
    const double c0 = support.center(), r0 = support.half_width();
    if (n == 0) return 0.0;
    const double u = (x - c0) / r0;
    double um1 = 1.0, ucur = 2.0 * u;  // U_0, U_1
    if (n == 1) return 2.0 / r0;
    for (int k = 2; k < n; ++k) {
      const double nx = 2.0 * u * ucur - um1;
      um1 = ucur;
      ucur = nx;
    }
    return 2.0 * n * ucur / r0;
  };
  return f;
}

TestFunction exponential(double rate) {
  std::ostringstream tag;
  tag << "exp(" << rate << "x)";
  TestFunction f;
  f.value = [rate](double x) { return std::exp(rate * x); };
  f.derivative = [rate](double x) { return rate * std::exp(rate * x); };
  f.tag = tag.str();
  return f;
}

TestFunction sine(double frequency) {
  std::ostringstream tag;
  tag << "sin(" << frequency << "x)";
  TestFunction f;
  f.value = [frequency](double x) { return std::sin(frequency * x); };
  f.derivative = [frequency](double x) { return frequency * std::cos(frequency * x); };
  f.tag = tag.str();
  return f;
}

TestFunction piecewise_linear(std::vector<double> knots, std::vector<double> heights) {
  if (knots.size() < 2 || knots.size() != heights.size() ||
      !std::is_sorted(knots.begin(), knots.end())) {
    throw ValidationError("piecewise_linear needs at least two sorted knots with matching heights");
  }
  auto locate = [knots](double x) {
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
    return std::min(i, knots.size() - 2);
  };
  auto slope = [knots, heights](std::size_t i) {
    return (heights[i + 1] - heights[i]) / (knots[i + 1] - knots[i]);
  };
  TestFunction f;
  f.value = [=](double x) {
    const std::size_t i = locate(x);
    return heights[i] + slope(i) * (x - knots[i]);
  };
  f.derivative = [=](double x) { return slope(locate(x)); };
  f.tag = "pwl";
  f.outside_hypotheses = true;
  return f;
}

TestFunction by_name(const std::string& name, const SupportInterval& support) {
  if (name == "const") return constant(1.0);
  if (name == "x") return monomial(1);
  if (name == "exp") return exponential(1.0);
  if (name == "sin") return sine(1.0);
  if (name == "pwl") return piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
  auto suffix_int = [&](const std::string& prefix, int& out) {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return false;
    const std::string digits = name.substr(prefix.size());
    if (digits.find_first_not_of("0123456789") != std::string::npos) return false;
    out = std::stoi(digits);
    return true;
  };
  int k = 0;
  if (suffix_int("gamma", k)) return gamma(k, support);
  if (suffix_int("x", k)) return monomial(k);
  throw ValidationError("unknown test function '" + name + "'");
}

}  // namespace functions

double derivative_mismatch(const TestFunction& f, int probes, double h) {
  if (!f.has_derivative()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double x = h + (1.0 - 2.0 * h) * i / (probes - 1);
    const double fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
    const double d = f.derivative(x);
    worst = std::max(worst, std::abs(d - fd) / std::max(1.0, std::abs(d)));
  }
  return worst;
}

namespace {

void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string(where) + ": non-finite integrand sample");
  }
}

}  // namespace

double integrate_mu(const TestFunction& f, const AsymptoticParams& asym, int nodes) {
  const auto s = support_edges(asym);
  const double c = s.center(), r = s.half_width();
  const auto theta = theta_nodes(nodes);
  std::vector<double> terms(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double sn = std::sin(theta[j]);
    const double x = c + r * std::cos(theta[j]);
    terms[j] = f.value(x) * r * r * sn * sn / (x * (1.0 - x));
    require_finite(terms[j], "integrate_mu");
  }
  // (1/(2 pi a)) * (pi / nodes) * sum
  return pairwise_sum(terms) / (2.0 * asym.a * nodes);
}

double integrate_nu(const TestFunction& f, const SupportInterval& support, int nodes) {
  const double c = support.center(), r = support.half_width();
  const auto theta = theta_nodes(nodes);
  std::vector<double> terms(nodes);
  for (int j = 0; j < nodes; ++j) {
    terms[j] = f.value(c + r * std::cos(theta[j]));
    require_finite(terms[j], "integrate_nu");
  }
  const double arcsine_mean = pairwise_sum(terms) / nodes;
  return 0.25 * f.value(support.lambda_minus) + 0.25 * f.value(support.lambda_plus) -
         0.5 * arcsine_mean;
}

double cheb_gamma(int n, double x, const SupportInterval& support) {
  if (n < 0) throw ValidationError("cheb_gamma: n must be nonnegative");
  const double u = (x - support.center()) / support.half_width();
  if (n == 0) return 2.0;
  double prev = 1.0, cur = u;
  for (int k = 2; k <= n; ++k) {
    const double next = 2.0 * u * cur - prev;
    prev = cur;
    cur = next;
  }
  return 2.0 * cur;
}

ChebyshevCoefficients cheb_coeffs(const TestFunction& f, int N, const SupportInterval& support,
                                  int nodes) {
  if (N < 0) throw ValidationError("cheb_coeffs: N must be nonnegative");
  const double c = support.center(), r = support.half_width();
  const auto theta = theta_nodes(nodes);
  std::vector<double> values(nodes);
  for (int j = 0; j < nodes; ++j) {
    values[j] = f.value(c + r * std::cos(theta[j]));
    require_finite(values[j], "cheb_coeffs");
  }
  ChebyshevCoefficients out;
  out.N = N;
  out.nodes = nodes;
  out.fhat.resize(N + 1);
  std::vector<double> terms(nodes);
  for (int n = 0; n <= N; ++n) {
    for (int j = 0; j < nodes; ++j) terms[j] = values[j] * std::cos(n * theta[j]);
    out.fhat[n] = pairwise_sum(terms) / nodes;
  }
  return out;
}

VarianceFunctionals variance_functionals(const TestFunction& f, int N, double beta,
                                         const SupportInterval& support, int nodes) {
  if (!(beta > 0.0)) throw ValidationError("variance_functionals: beta must be positive");
  const auto co = cheb_coeffs(f, N, support, nodes);
  VarianceFunctionals out;
  out.N = N;
  std::vector<double> s_terms, t_terms;
  double largest = 0.0, tail = 0.0;
  const int tail_start = std::max(1, N - N / 10);
  for (int n = 1; n <= N; ++n) {
    const double a2 = co.fhat[n] * co.fhat[n];
    s_terms.push_back(n * a2);
    t_terms.push_back(static_cast<double>(n) * n * a2);
    largest = std::max(largest, t_terms.back());
    if (n >= tail_start) tail = std::max(tail, t_terms.back());
  }
  out.sigma_sq = (2.0 / beta) * pairwise_sum(s_terms);
  out.tau_sq = pairwise_sum(t_terms);
  out.tail_estimate = tail * (N - tail_start + 1);
  out.non_decaying = N >= 10 && tail > 1e-12 * std::max(largest, 1e-300) && tail > 1e-24;
  return out;
}

double tau_sq_direct(const TestFunction& f, const SupportInterval& support, int nodes) {
  if (!f.has_derivative()) throw ValidationError("tau_sq_direct: derivative required");
  const double c = support.center(), r = support.half_width();
  const auto theta = theta_nodes(nodes);
  std::vector<double> terms(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double d = f.derivative(c + r * std::cos(theta[j]));
    const double sn = std::sin(theta[j]);
    terms[j] = d * d * r * r * sn * sn;
  }
  // (1/(2 pi)) * (pi / nodes) * sum
  return pairwise_sum(terms) / (2.0 * nodes);
}

StieltjesPair stieltjes_pair(double x, const AsymptoticParams& asym) {
  const auto s = support_edges(asym);
  if (!std::isfinite(x) || (x >= s.lambda_minus && x <= s.lambda_plus) || x == 0.0 || x == 1.0) {
    std::ostringstream msg;
    msg << "stieltjes_pair: x = " << x << " must lie outside [" << s.lambda_minus << ", "
        << s.lambda_plus << "] and differ from 0 and 1";
    throw ValidationError(msg.str());
  }
  const double a = asym.a, b = asym.b, c = s.center();
  // Branch with S ~ x - c at infinity, continued across the gap below the support.
  const double root = std::sqrt((x - s.lambda_minus) * (x - s.lambda_plus));
  const double S = x > c ? root : -root;
  StieltjesPair out;
  out.m0 = ((a - b) + (1.0 - 2.0 * a) * x - S) / (2.0 * a * x * (1.0 - x));
  out.m1 = (c - x + S) / (2.0 * (x - s.lambda_plus) * (x - s.lambda_minus));
  return out;
}

std::vector<double> jacobi_roots(int n, double r, double s) {
  std::vector<double> diag, off;
  jacobi01_recurrence(n, r, s, diag, off);
  return eigenvalues(SymTridiagonal{diag, off}).values;
}

std::pair<double, double> zero_temperature_exponents(int n, const AsymptoticParams& asym) {
  return {n * (asym.b / asym.a - 1.0), n * ((1.0 - asym.b) / asym.a - 1.0)};
}

}  // namespace betajac
