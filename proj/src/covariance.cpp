#include "betajac/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "betajac/eig.hpp"
#include "betajac/errors.hpp"
#include "betajac/paths.hpp"
#include "betajac/quadrature.hpp"
#include "betajac/spectral.hpp"

namespace betajac {

XY xy_of_sigma(double sigma, const AsymptoticParams& asym) {
  const double a = asym.a, b = asym.b;
  const double slack = 1e-14;
  if (!(sigma >= -a - slack && sigma <= slack)) {
    std::ostringstream msg;
    msg << "xy_of_sigma: sigma = " << sigma << " outside [-a, 0] = [" << -a << ", 0]";
    throw ValidationError(msg.str());
  }
  const double d = 1.0 + 2.0 * sigma;
  XY out;
  out.x = std::sqrt(std::max(0.0, (b + sigma) * (1.0 - a + sigma))) / d;
  out.y = std::sqrt(std::max(0.0, (1.0 - b + sigma) * (a + sigma))) / d;
  return out;
}

namespace {

// Derivatives of p_1..p_K at every node of a rule, cached so a full matrix
// costs one pass over the nodes.
struct DerivativeTable {
  std::vector<double> weight;           // quadrature weight times (alpha/4)/(1 + 2s)
  std::vector<double> one_minus_r2;     // 1 - x^2 - y^2
  std::vector<double> two_xy;           // 2 x y
  std::vector<std::vector<double>> px;  // px[k][node]
  std::vector<std::vector<double>> py;
};

DerivativeTable tabulate(int K, const AsymptoticParams& asym, int nodes) {
  asym.require_proportional();
  const auto rule = gauss_legendre(nodes, -asym.a, 0.0);
  DerivativeTable t;
  t.px.assign(K + 1, std::vector<double>(nodes));
  t.py.assign(K + 1, std::vector<double>(nodes));
  std::vector<WeightPolynomial> polys;
  for (int k = 0; k <= K; ++k) polys.push_back(p_poly(k));
  for (int i = 0; i < nodes; ++i) {
    const double s = rule.nodes[i];
    const auto xy = xy_of_sigma(s, asym);
    t.weight.push_back(rule.weights[i] * 0.25 * asym.alpha / (1.0 + 2.0 * s));
    t.one_minus_r2.push_back(1.0 - xy.x * xy.x - xy.y * xy.y);
    t.two_xy.push_back(2.0 * xy.x * xy.y);
    for (int k = 1; k <= K; ++k) {
      t.px[k][i] = polys[k].dx(xy.x, xy.y);
      t.py[k][i] = polys[k].dy(xy.x, xy.y);
    }
  }
  return t;
}

double entry_from(const DerivativeTable& t, int k, int l) {
  const std::size_t nodes = t.weight.size();
  std::vector<double> terms(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double same = t.px[k][i] * t.px[l][i] + t.py[k][i] * t.py[l][i];
    const double cross = t.px[k][i] * t.py[l][i] + t.py[k][i] * t.px[l][i];
    terms[i] = t.weight[i] * (same * t.one_minus_r2[i] - cross * t.two_xy[i]);
  }
  return pairwise_sum(terms);
}

void check_index(int k, int l) {
  if (k < 1 || l < 1) throw ValidationError("covariance indices start at 1");
}

constexpr double kDoublingTolerance = 1e-10;

}  // namespace

QuadratureEstimate covariance_entry_estimate(int k, int l, const AsymptoticParams& asym, int nodes) {
  check_index(k, l);
  const int K = std::max(k, l);
  const double coarse = entry_from(tabulate(K, asym, nodes), k, l);
  const double fine = entry_from(tabulate(K, asym, 2 * nodes), k, l);
  return {fine, std::abs(fine - coarse)};
}

double covariance_entry(int k, int l, const AsymptoticParams& asym, int nodes) {
  const auto est = covariance_entry_estimate(k, l, asym, nodes);
  if (est.error > kDoublingTolerance * std::max(1.0, std::abs(est.value))) {
    std::ostringstream msg;
    msg << "covariance_entry(" << k << ", " << l << "): node doubling changed the value by "
        << est.error;
    throw NumericalError(msg.str());
  }
  return est.value;
}

double CovarianceMatrix::smallest_eigenvalue() const {
  const auto values = dense_symmetric_eigenvalues(entries);
  return values.empty() ? 0.0 : values.front();
}

CovarianceMatrix covariance_matrix(int K, const AsymptoticParams& asym, int nodes) {
  if (K < 1) throw ValidationError("covariance_matrix: K must be positive");
  const auto coarse = tabulate(K, asym, nodes);
  const auto fine = tabulate(K, asym, 2 * nodes);
  CovarianceMatrix cov;
  cov.K = K;
  cov.quadrature_nodes = 2 * nodes;
  cov.conditioning = asym.conditioning();
  cov.entries.assign(K, std::vector<double>(K, 0.0));
  for (int k = 1; k <= K; ++k) {
    for (int l = k; l <= K; ++l) {
      const double v = entry_from(fine, k, l);
      cov.entries[k - 1][l - 1] = cov.entries[l - 1][k - 1] = v;
      cov.error_estimate = std::max(cov.error_estimate, std::abs(v - entry_from(coarse, k, l)));
    }
  }
  if (cov.error_estimate > kDoublingTolerance) {
    std::ostringstream msg;
    msg << "covariance_matrix: node doubling changed entries by " << cov.error_estimate;
    throw NumericalError(msg.str());
  }
  return cov;
}

double BasisChange::reconstruct(int n, double x, const SupportInterval& support) const {
  double s = 0.0;
  for (int k = 0; k <= n; ++k) s += L[n][k] * cheb_gamma(k, x, support);
  return s;
}

BasisChange basis_L(int N, const SupportInterval& support) {
  if (N < 0 || N > 64) throw ValidationError("basis_L: N must lie in [0, 64]");
  const double c = support.center(), r = support.half_width();
  BasisChange out;
  out.N = N;
  out.L.assign(N + 1, std::vector<double>(N + 1, 0.0));
  out.L[0][0] = 0.5;
  for (int n = 1; n <= N; ++n) {
    const auto& prev = out.L[n - 1];
    auto& row = out.L[n];
    for (int k = 0; k < n; ++k) {
      const double v = prev[k];
      if (v == 0.0) continue;
      row[k] += c * v;
      if (k == 0) {
        row[1] += r * v;
      } else {
        row[k + 1] += 0.5 * r * v;
        row[k - 1] += 0.5 * r * v;
      }
    }
  }
  return out;
}

CovarianceMatrix theory_covariance(int K, double beta, const SupportInterval& support) {
  if (K < 1 || K > 32) throw ValidationError("theory_covariance: K must lie in [1, 32]");
  if (!(beta > 0.0)) throw ValidationError("theory_covariance: beta must be positive");
  const auto basis = basis_L(K, support);
  const double alpha = 2.0 / beta;
  CovarianceMatrix cov;
  cov.K = K;
  cov.entries.assign(K, std::vector<double>(K, 0.0));
  for (int k = 1; k <= K; ++k) {
    for (int l = k; l <= K; ++l) {
      double s = 0.0;
      for (int m = 1; m <= std::min(k, l); ++m) s += basis.L[k][m] * m * basis.L[l][m];
      cov.entries[k - 1][l - 1] = cov.entries[l - 1][k - 1] = alpha * s;
    }
  }
  return cov;
}

namespace {

// d^m/dz^m sqrt(z) at z, divided by sqrt(z): prod_{j<m} (1/2 - j) z^{-m}.
double sqrt_derivative_ratio(int m, double z) {
  double c = 1.0;
  for (int j = 0; j < m; ++j) c *= (0.5 - j) / z;
  return c;
}

}  // namespace

LaplacePair laplace_closed(double eta, double omega, const SupportInterval& support, double beta) {
  const double lm = support.lambda_minus, lp = support.lambda_plus;
  if (!(eta > lp) || !(omega > lp)) {
    std::ostringstream msg;
    msg << "laplace_closed: eta = " << eta << " and omega = " << omega
        << " must exceed lambda_+ = " << lp;
    throw ValidationError(msg.str());
  }
  if (!(beta > 0.0)) throw ValidationError("laplace_closed: beta must be positive");
  const double alpha = 2.0 / beta;
  const double c = support.center(), r = support.half_width();
  LaplacePair out;

  const double et = eta - c, om = omega - c;
  const double bracket = std::sqrt((om + r) * (et - r)) + std::sqrt((om - r) * (et + r));
  out.t_form = r * r / (std::sqrt(et * et - r * r) * std::sqrt(om * om - r * r) * bracket * bracket);

  const double ra = std::sqrt(omega - lm), rb = std::sqrt(omega - lp);
  const double denom = std::sqrt((omega - lm) * (omega - lp)) * std::sqrt((eta - lm) * (eta - lp));
  const double h = eta - omega;
  double quotient;
  if (std::abs(h) < 1e-4 * (eta + omega)) {
    // g(eta) = ra sqrt(eta - lp) - rb sqrt(eta - lm) vanishes at omega;
    // g(eta)/(eta - omega) by its Taylor series to fourth order.
    quotient = 0.0;
    double hp = 1.0, fact = 1.0;
    for (int m = 1; m <= 5; ++m) {
      fact *= m;
      const double gm = ra * rb * sqrt_derivative_ratio(m, omega - lp) -
                        rb * ra * sqrt_derivative_ratio(m, omega - lm);
      quotient += gm * hp / fact;
      hp *= h;
    }
  } else {
    quotient = (ra * std::sqrt(eta - lp) - rb * std::sqrt(eta - lm)) / h;
  }
  out.c_form = 0.25 * alpha * quotient * quotient / denom;
  return out;
}

double laplace_partial_sum(int K, double eta, double omega, const CovarianceMatrix& cov) {
  if (K < 1 || K > cov.K) throw ValidationError("laplace_partial_sum: K outside the matrix");
  std::vector<double> ek(K + 1), ol(K + 1);
  for (int k = 1; k <= K; ++k) {
    ek[k] = std::pow(eta, -k - 1);
    ol[k] = std::pow(omega, -k - 1);
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(K) * K);
  for (int k = 1; k <= K; ++k)
    for (int l = 1; l <= K; ++l) terms.push_back(cov.at(k, l) * ek[k] * ol[l]);
  return pairwise_sum(terms);
}

}  // namespace betajac
