#include "betajac/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "betajac/errors.hpp"
#include "betajac/linear_stats.hpp"
#include "betajac/model.hpp"
#include "betajac/parallel.hpp"
#include "betajac/quadrature.hpp"

namespace betajac {

namespace {

double safe_ratio(double variance, double bound) {
  if (variance == 0.0) return 0.0;
  if (bound == 0.0) return std::numeric_limits<double>::infinity();
  return variance / bound;
}

// Mean, variance and the standard errors of both from a sample.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
};

SampleMoments sample_moments(const std::vector<double>& x) {
  const double m = static_cast<double>(x.size());
  SampleMoments out;
  out.mean = pairwise_sum(x) / m;
  std::vector<double> d2(x.size()), d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - out.mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / m;
  const double m4 = pairwise_sum(d4) / m;
  out.variance = m2 * m / (m - 1.0);
  out.mean_se = std::sqrt(out.variance / m);
  out.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / m);
  return out;
}

}  // namespace

double PoincareReport::margin_in_se() const {
  const double se = std::hypot(variance_se, bound_se);
  const double gap = bound - variance;
  if (se == 0.0) {
    if (gap > 0.0) return std::numeric_limits<double>::infinity();
    if (gap < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return gap / se;
}

bool PoincareReport::holds_with_margin(double k) const {
  const double se = std::hypot(variance_se, bound_se);
  return variance + k * se <= bound;
}

PoincareReport beta_poincare_ratio(double p, double q, const TestFunction& f, bool weighted,
                                   int nodes) {
  if (!(p > 0.0) || !(q > 0.0)) throw ValidationError("beta_poincare_ratio: p and q must be positive");
  if (!f.has_derivative()) throw ValidationError("beta_poincare_ratio: " + f.tag + " has no derivative");
  const QuadratureRule rule = gauss_beta(nodes, p, q);
  const std::size_t m = rule.nodes.size();
  std::vector<double> fv(m), terms(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = rule.nodes[i];
    fv[i] = weighted ? f(2.0 * y - 1.0) : f(y);
    terms[i] = rule.weights[i] * fv[i];
  }
  const double mean = pairwise_sum(terms);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = fv[i] - mean;
    terms[i] = rule.weights[i] * d * d;
  }
  PoincareReport out;
  out.variance = pairwise_sum(terms);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = rule.nodes[i];
    if (weighted) {
      const double x = 2.0 * y - 1.0;
      const double g = f.derivative(x);
      // 1 - x^2 = 4 y (1 - y), exact near both ends.
      terms[i] = rule.weights[i] * 4.0 * y * (1.0 - y) * g * g;
    } else {
      const double g = f.derivative(y);
      terms[i] = rule.weights[i] * g * g;
    }
  }
  const double scale = weighted ? 1.0 / (p + q) : 1.0 / (4.0 * (p + q));
  out.bound = scale * pairwise_sum(terms);
  out.ratio = safe_ratio(out.variance, out.bound);
  out.nodes = nodes;
  return out;
}

double jacobi_poincare_prefactor(const EnsembleParams& params) {
  const AsymptoticParams asym = derive_asymptotic(params);
  const double gap = std::min(asym.b / asym.a - 1.0, (1.0 - asym.b) / asym.a - 1.0);
  if (!(gap > 0.0))
    throw ValidationError("jacobi_poincare_check: needs b/a > 1 and (1-b)/a > 1 (p, q > 1)");
  return asym.alpha / (4.0 * params.n() * gap);
}

PoincareReport jacobi_poincare_check(const EnsembleParams& params, const TestFunction& f,
                                     int replicates, std::uint64_t seed, int threads) {
  if (replicates < 2) throw ValidationError("jacobi_poincare_check: need at least two replicates");
  const double prefactor = jacobi_poincare_prefactor(params);
  const std::vector<TestFunction> funcs{f, derivative_square(f)};
  std::vector<double> stat(replicates), grad(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    const ReplicateStreams streams(seed, r);
    const SymTridiagonal a = assemble_gram(sample_factor(params, streams));
    std::vector<double> v;
    try {
      v = linear_statistics(a, funcs);
    } catch (const NumericalError& e) {
      throw NumericalError("replicate " + std::to_string(r) + ": " + e.what());
    }
    stat[r] = v[0];
    grad[r] = v[1];
  });
  const SampleMoments sm = sample_moments(stat);
  const SampleMoments gm = sample_moments(grad);
  PoincareReport out;
  out.variance = sm.variance;
  out.variance_se = sm.variance_se;
  out.bound = prefactor * gm.mean;
  out.bound_se = prefactor * gm.mean_se;
  out.ratio = safe_ratio(out.variance, out.bound);
  out.replicates = replicates;
  return out;
}

namespace {

void check_coupling_domain(double n, double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) throw ValidationError("coupling_gap: p and q must be positive");
  if (!(n > std::max(1.0 / p, 1.0 / q)))
    throw ValidationError("coupling_gap: needs n > max(1/p, 1/q)");
}

}  // namespace

double coupling_gap(double n, double p, double q, int nodes) {
  check_coupling_domain(n, p, q);
  const double mu = std::sqrt(p / (p + q));
  const double sigma = std::sqrt(q) / (2.0 * (p + q) * std::sqrt(n));
  const double s1 = n * p;
  const double s2 = n * q;
  const QuadratureRule rule = gauss_hermite_normal(nodes);
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    double b = 0.0;
    try {
      // Invert through whichever tail keeps the probability accurate.
      if (z <= 0.0) {
        const double lower = 0.5 * boost::math::erfc(-z / std::sqrt(2.0));
        b = boost::math::ibeta_inv(s1, s2, lower);
      } else {
        const double upper = 0.5 * boost::math::erfc(z / std::sqrt(2.0));
        b = boost::math::ibetac_inv(s1, s2, upper);
      }
    } catch (const std::exception& e) {
      throw NumericalError(std::string("coupling_gap: quantile inversion failed: ") + e.what());
    }
    if (!std::isfinite(b)) throw NumericalError("coupling_gap: non-finite quantile");
    const double d = std::sqrt(b) - mu - sigma * z;
    terms[i] = rule.weights[i] * d * d;
  }
  return pairwise_sum(terms);
}

double independent_coupling_gap(double n, double p, double q) {
  check_coupling_domain(n, p, q);
  const double mu = std::sqrt(p / (p + q));
  const double sigma = std::sqrt(q) / (2.0 * (p + q) * std::sqrt(n));
  // E sqrt(B) = Gamma(np + 1/2) Gamma(n(p+q)) / (Gamma(np) Gamma(n(p+q) + 1/2)).
  const double mean_y = boost::math::tgamma_delta_ratio(n * (p + q), 0.5) /
                        boost::math::tgamma_delta_ratio(n * p, 0.5);
  const double second = p / (p + q);
  return second - 2.0 * mu * mean_y + mu * mu + sigma * sigma;
}

}  // namespace betajac
