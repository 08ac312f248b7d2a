#include "betajac/acceptance.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>

#include "betajac/concentration.hpp"
#include "betajac/covariance.hpp"
#include "betajac/eig.hpp"
#include "betajac/errors.hpp"
#include "betajac/experiments.hpp"
#include "betajac/model.hpp"
#include "betajac/paths.hpp"
#include "betajac/quadrature.hpp"
#include "betajac/spectral.hpp"

namespace betajac {

namespace {

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

void append(std::string& detail, const std::string& part) {
  if (!detail.empty()) detail += "; ";
  detail += part;
}

double rel_err(double value, double target) { return std::abs(value - target) / std::abs(target); }

// The (1/4, 1/2) reference point: c = 1/2, r = sqrt(3)/4.
AsymptoticParams reference(double beta) { return AsymptoticParams::from_ab(0.25, 0.5, beta); }

using Dense = std::vector<std::vector<double>>;

Dense dense_gram(const TridiagonalFactor& f) {
  const int n = f.size();
  Dense b(n, std::vector<double>(n, 0.0));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) b[i - 1][j - 1] = f.entry(i, j);
  Dense a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) a[i][j] += b[i][m] * b[j][m];
  return a;
}

std::vector<double> dense_power_traces(const Dense& a, int kmax) {
  const std::size_t n = a.size();
  std::vector<double> out(kmax + 1, 0.0);
  Dense p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) p[i][i] = 1.0;
  out[0] = static_cast<double>(n);
  for (int k = 1; k <= kmax; ++k) {
    Dense next(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t j = 0; j < n; ++j) next[i][j] += p[i][m] * a[m][j];
    p = std::move(next);
    for (std::size_t i = 0; i < n; ++i) out[k] += p[i][i];
  }
  return out;
}

SymTridiagonal random_tridiagonal(int n, Stream& rng) {
  SymTridiagonal a;
  a.diag.resize(n);
  a.off.resize(n > 0 ? n - 1 : 0);
  for (auto& v : a.diag) v = 2.0 * rng.uniform() - 1.0;
  for (auto& v : a.off) v = 2.0 * rng.uniform() - 1.0;
  return a;
}

struct Outcome {
  bool passed = true;
  std::string detail;
  bool skipped = false;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    append(detail, (ok ? "" : "FAILED ") + what);
  }
};

Outcome combinatorics() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  bool counts = true, weights = true;
  for (int k = 0; k <= 8; ++k) {
    const BridgeSet set = enumerate_bridges(k);
    mpz_class central;
    mpz_bin_uiui(central.get_mpz_t(), 2 * k, k);
    if (mpz_class(static_cast<unsigned long>(set.size())) != central) counts = false;
    std::map<int, long> by_horizontal;
    for (const auto& br : set.bridges) ++by_horizontal[br.horizontal_steps()];
    const WeightPolynomial p = p_poly(k);
    for (int l = 0; l <= k; ++l) {
      mpz_class c;
      mpz_bin_uiui(c.get_mpz_t(), k, l);
      const mpz_class expected = c * c;
      if (p.exact_coeff(l) != expected) weights = false;
      if (mpz_class(by_horizontal[2 * l]) != expected) weights = false;
    }
    for (const auto& [h, count] : by_horizontal)
      if (h % 2 != 0 && count != 0) weights = false;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(counts, "|A_2k| = C(2k,k) for k <= 8");
  o.require(weights, "bridge weight sums equal C(k,l)^2 exactly");
  o.require(secs < 5.0, fmt("runtime %.2f s < 5 s", secs));
  return o;
}

Outcome path_oracle(std::uint64_t seed) {
  Outcome o;
  Stream rng(seed, 2);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(rng.uniform() * 16);
    const double beta = std::array<double, 3>{1.0, 2.0, 4.0}[rep % 3];
    const double p = 1.2 + 3.0 * rng.uniform();
    const double q = 1.2 + 3.0 * rng.uniform();
    const TridiagonalFactor f =
        sample_factor(EnsembleParams::from_pq(n, beta, p, q), ReplicateStreams(seed, 1000 + rep));
    const std::vector<double> dense = dense_power_traces(dense_gram(f), 6);
    for (int k = 1; k <= 6; ++k) worst = std::max(worst, rel_err(trace_via_paths(f, k), dense[k]));
  }
  o.require(worst <= 1e-10, fmt("max relative gap %.2e <= 1e-10 over 100 factors", worst));
  return o;
}

Outcome egf_identity() {
  Outcome o;
  const double x = 0.3, y = 0.5, t = 0.7;
  double sum = 0.0, fact = 1.0;
  for (int k = 0; k <= 20; ++k) {
    if (k > 0) fact *= k;
    sum += std::pow(t, k) * p_poly(k).value(x, y) / fact;
  }
  const double closed = std::exp(t * (x * x + y * y)) * std::cyl_bessel_i(0.0, 2.0 * x * y * t);
  o.require(std::abs(sum - closed) <= 1e-10, fmt("|partial sum - closed form| = %.2e <= 1e-10",
                                                 std::abs(sum - closed)));
  return o;
}

Outcome eigensolver(std::uint64_t seed) {
  Outcome o;
  Stream rng(seed, 4);
  double worst_trace = 0.0, worst_frob = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 512);
    const SymTridiagonal a = random_tridiagonal(n, rng);
    const Spectrum s = eigenvalues(a);
    double s1 = 0.0, s2 = 0.0, abs1 = 0.0;
    for (double v : s.values) {
      s1 += v;
      s2 += v * v;
      abs1 += std::abs(v);
    }
    worst_trace = std::max(worst_trace, std::abs(s1 - a.trace()) / std::max(abs1, 1.0));
    worst_frob = std::max(worst_frob, std::abs(s2 - a.frobenius_sq()) / a.frobenius_sq());
  }
  double worst_sturm = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 10);
    const SymTridiagonal a = random_tridiagonal(n, rng);
    const auto ql = eigenvalues(a).values;
    const auto bis = bisection_eigenvalues(a);
    for (int i = 0; i < n; ++i) worst_sturm = std::max(worst_sturm, std::abs(ql[i] - bis[i]));
  }
  o.require(worst_trace <= 1e-12, fmt("trace identity %.2e <= 1e-12", worst_trace));
  o.require(worst_frob <= 1e-12, fmt("Frobenius identity %.2e <= 1e-12", worst_frob));
  o.require(worst_sturm <= 1e-10, fmt("Sturm bisection gap %.2e <= 1e-10", worst_sturm));
  return o;
}

Outcome diagonalization() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  for (double beta : {4.0, 2.0, 1.0}) {
    const AsymptoticParams asym = reference(beta);
    const CovarianceMatrix quad = covariance_matrix(8, asym);
    const CovarianceMatrix theory = theory_covariance(8, beta, support_edges(asym));
    double worst = 0.0;
    for (int k = 1; k <= 8; ++k)
      for (int l = 1; l <= 8; ++l) worst = std::max(worst, std::abs(quad.at(k, l) - theory.at(k, l)));
    const double alpha = asym.alpha;
    const double e11 = std::abs(quad.at(1, 1) - 3.0 * alpha / 64.0);
    const double e22 = std::abs(quad.at(2, 2) - 105.0 * alpha / 2048.0);
    o.require(worst <= 1e-8, fmt("alpha=%g max|C - aLLL^T| = %.1e", alpha, worst));
    o.require(e11 <= 1e-10, fmt("alpha=%g |C11 - 3a/64| = %.1e", alpha, e11));
    o.require(e22 <= 1e-8, fmt("alpha=%g |C22 - 105a/2048| = %.1e", alpha, e22));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 30.0, fmt("runtime %.2f s < 30 s", secs));
  return o;
}

Outcome laplace() {
  Outcome o;
  const SupportInterval support = support_edges(reference(2.0));
  const double c = support.center(), r = support.half_width();
  const double grid[] = {1.0, 1.25, 2.0, 3.0, 5.0};
  double worst_form = 0.0;
  for (double beta : {1.0, 2.0, 4.0})
    for (double eta : grid)
      for (double omega : grid) {
        const LaplacePair p = laplace_closed(eta, omega, support, beta);
        worst_form = std::max(worst_form, rel_err(p.c_form, 2.0 / beta * p.t_form));
      }
  // Laplace transform of e^{ct} I_k(rt) at w: (r / (w - c + root))^k / root.
  auto bessel_laplace = [&](int k, double w) {
    const double s = w - c;
    const double root = std::sqrt(s * s - r * r);
    return std::pow(r / (s + root), k) / root;
  };
  double worst_series = 0.0;
  for (double eta : grid)
    for (double omega : grid) {
      double series = 0.0;
      for (int k = 1; k <= 400; ++k) series += k * bessel_laplace(k, eta) * bessel_laplace(k, omega);
      worst_series =
          std::max(worst_series, std::abs(series - laplace_closed(eta, omega, support, 2.0).t_form));
    }
  const CovarianceMatrix cov = covariance_matrix(40, reference(2.0));
  double worst_partial = 0.0;
  for (double eta : {2.0, 3.0, 5.0})
    for (double omega : {2.0, 3.0, 5.0})
      worst_partial = std::max(worst_partial, std::abs(laplace_partial_sum(40, eta, omega, cov) -
                                                       laplace_closed(eta, omega, support, 2.0).c_form));
  o.require(worst_form <= 1e-12, fmt("C = alpha T rel %.1e on 5x5 grid", worst_form));
  o.require(worst_series <= 1e-10, fmt("Bessel series vs T %.1e", worst_series));
  o.require(worst_partial <= 1e-6, fmt("K=40 partial sum vs C %.1e", worst_partial));
  return o;
}

Outcome clt(const AcceptanceOptions& opt) {
  Outcome o;
  if (opt.quick) {
    o.skipped = true;
    o.detail = "skipped in quick mode";
    return o;
  }
  for (double beta : {1.0, 2.0, 4.0}) {
    ExperimentConfig c;
    c.params = EnsembleParams::from_pq(2000, beta, 2.0, 2.0);
    const SupportInterval support = support_edges(derive_asymptotic(c.params));
    for (int i = 1; i <= 4; ++i) c.functions.push_back(functions::gamma(i, support));
    c.functions.push_back(functions::monomial(1));
    c.replicates = 10000;
    c.seed = opt.seed + static_cast<std::uint64_t>(beta * 10);
    c.threads = opt.threads;
    c.keep_samples = false;
    const RunResult r = run_fluctuations(c);
    const double alpha = 2.0 / beta;
    double worst_var = 0.0, worst_skew = 0.0, worst_kurt = 0.0, worst_off = 0.0;
    for (int i = 0; i < 4; ++i) {
      worst_var = std::max(worst_var, rel_err(r.variances[i], alpha * (i + 1)));
      worst_skew = std::max(worst_skew, std::abs(r.skewness[i]));
      worst_kurt = std::max(worst_kurt, std::abs(r.excess_kurtosis[i]));
      for (int j = 0; j < i; ++j)
        worst_off = std::max(worst_off, std::abs(r.covariance[i][j]) / r.covariance_se[i][j]);
    }
    const double rr = support.half_width();
    const double xvar = rel_err(r.variances[4], alpha * rr * rr / 4.0);
    o.require(worst_var <= 0.05, fmt("beta=%g Var Gamma_i rel %.3f", beta, worst_var));
    o.require(worst_off <= 3.0, fmt("beta=%g offdiag %.2f SE", beta, worst_off));
    o.require(worst_skew <= 0.1, fmt("beta=%g |skew| %.3f", beta, worst_skew));
    o.require(worst_kurt <= 0.2, fmt("beta=%g |kurt| %.3f", beta, worst_kurt));
    o.require(xvar <= 0.05, fmt("beta=%g Var tr A rel %.3f", beta, xvar));
  }
  return o;
}

Outcome deviation() {
  Outcome o;
  const DeviationReport four = deviation_check(2, RationalParams::parse("1/2", "1/4", "1/2"));
  const double target = -3.0 / 128.0;
  o.require(rel_err(four.deviation, target) <= 0.01,
            fmt("beta=4 k=2 deviation %.7f vs -3/128 (rel %.1e)", four.deviation,
                rel_err(four.deviation, target)));
  o.require(rel_err(four.predicted, target) <= 1e-10, fmt("nu side %.7f", four.predicted));
  bool k1_zero = true;
  for (const char* alpha : {"1/2", "1", "2"})
    k1_zero = k1_zero && deviation_check(1, RationalParams::parse(alpha, "1/4", "1/2")).deviation_exact == "0";
  o.require(k1_zero, "k=1 deviation exactly 0");
  double worst_b2 = 0.0;
  for (int k = 1; k <= 3; ++k)
    worst_b2 = std::max(worst_b2, std::abs(deviation_check(k, RationalParams::parse("1", "1/4", "1/2")).deviation));
  o.require(worst_b2 <= 1e-6, fmt("beta=2 deviation %.1e (k<=3)", worst_b2));
  return o;
}

Outcome palindromy() {
  Outcome o;
  const auto grid = geometric_grid(128, 3);
  const double one = eta_extract(2, RationalParams::parse("1", "1/4", "1/2"), grid).eta1.get_d();
  const double two = eta_extract(2, RationalParams::parse("2", "1/4", "1/2"), grid).eta1.get_d();
  const double half = eta_extract(2, RationalParams::parse("1/2", "1/4", "1/2"), grid).eta1.get_d();
  o.require(std::abs(one) <= 1e-6, fmt("eta2(1,1) = %.1e", one));
  const double rel = rel_err(two, -2.0 * half);
  o.require(rel <= 1e-3, fmt("eta2(1,2) = %.7f vs -2 eta2(1,1/2) = %.7f (rel %.1e)", two, -2.0 * half, rel));
  return o;
}

Outcome zero_temperature() {
  Outcome o;
  const AsymptoticParams asym = reference(2.0);
  const StieltjesPair sp = stieltjes_pair(2.0, asym);
  std::vector<double> residuals;
  for (int n : {100, 200, 400}) {
    const auto [r, s] = zero_temperature_exponents(n, asym);
    std::vector<double> terms;
    for (double l : jacobi_roots(n, r, s)) terms.push_back(1.0 / (2.0 - l));
    residuals.push_back(pairwise_sum(terms) / n - sp.m0 - sp.m1 / n);
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = residuals[i] / residuals[i + 1];
    o.require(ratio >= 2.0 && ratio <= 8.0, fmt("residual ratio %.3f in [2, 8]", ratio));
  }
  return o;
}

Outcome measures() {
  Outcome o;
  double worst_mu = 0.0, worst_nu = 0.0, worst_id = 0.0;
  const auto theta = theta_nodes(4096);
  for (double a : {0.05, 0.25, 0.45}) {
    for (double t : {0.0, 0.5, 1.0}) {
      const double b = t == 1.0 ? 1.0 - a : a + t * (1.0 - 2.0 * a);
      const AsymptoticParams asym = AsymptoticParams::from_ab(a, b, 2.0);
      const SupportInterval s = support_edges(asym);
      worst_mu = std::max(worst_mu, std::abs(integrate_mu(functions::constant(1.0), asym) - 1.0));
      worst_nu = std::max(worst_nu, std::abs(integrate_nu(functions::constant(1.0), s)));
      // x = c + r cos t turns the integrand into r^2 sin^2 t / (x (1 - x)).
      const double c = s.center(), r = s.half_width();
      std::vector<double> terms(theta.size());
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double x = c + r * std::cos(theta[j]);
        const double sn = std::sin(theta[j]);
        terms[j] = r * r * sn * sn / (x * (1.0 - x));
      }
      const double integral = pairwise_sum(terms) * std::numbers::pi / theta.size();
      worst_id = std::max(worst_id, std::abs(integral - 2.0 * std::numbers::pi * a));
    }
  }
  o.require(worst_mu <= 1e-10, fmt("|int dmu - 1| %.1e", worst_mu));
  o.require(worst_nu <= 1e-10, fmt("|int dnu| %.1e", worst_nu));
  o.require(worst_id <= 1e-8, fmt("edge identity vs 2 pi a %.1e", worst_id));
  return o;
}

Outcome concentration(const AcceptanceOptions& opt) {
  Outcome o;
  const double shapes[] = {0.5, 1.0, 2.0, 8.0};
  const std::vector<TestFunction> funcs{functions::monomial(1), functions::monomial(2),
                                        functions::monomial(3), functions::sine(2.0)};
  double worst_ratio = 0.0, worst_eq = 0.0;
  for (double p : shapes)
    for (double q : shapes) {
      for (const auto& f : funcs)
        for (bool weighted : {false, true})
          worst_ratio = std::max(worst_ratio, beta_poincare_ratio(p, q, f, weighted).ratio);
      worst_eq = std::max(worst_eq, std::abs(beta_poincare_ratio(p, q, funcs[0], true).ratio - 1.0));
    }
  o.require(worst_ratio <= 1.0 + 1e-8, fmt("max Beta ratio %.12f", worst_ratio));
  o.require(worst_eq <= 1e-6, fmt("weighted linear |ratio - 1| %.1e", worst_eq));
  for (int n : {64, 256}) {
    const PoincareReport r = jacobi_poincare_check(EnsembleParams::from_pq(n, 2.0, 2.0, 2.0),
                                                   functions::monomial(1), 10000, opt.seed + n, opt.threads);
    o.require(r.holds_with_margin(3.0), fmt("n=%d Var %.4f + 3 SE < bound %.4f (margin %.1f SE)", n,
                                            r.variance, r.bound, r.margin_in_se()));
  }
  return o;
}

Outcome coupling() {
  Outcome o;
  std::vector<double> scaled;
  for (double n : {1e2, 1e3, 1e4}) scaled.push_back(n * n * coupling_gap(n, 1.0, 1.0));
  for (std::size_t i = 1; i < scaled.size(); ++i) {
    const double ratio = scaled[i] / scaled[i - 1];
    o.require(ratio >= 0.5 && ratio <= 2.0, fmt("n^2 gap %.6f -> %.6f", scaled[i - 1], scaled[i]));
  }
  return o;
}

Outcome trotter(const AcceptanceOptions& opt) {
  Outcome o;
  std::vector<double> ratios;
  for (int n : {128, 512, 2048}) {
    const TrotterEstimate g =
        trotter_gap(EnsembleParams::from_pq(n, 2.0, 2.0, 2.0), 50, opt.seed + n, opt.threads);
    ratios.push_back(g.mean / std::log(n));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  o.require(*hi / *lo <= 4.0, fmt("gap/log n in [%.4f, %.4f], max/min %.2f", *lo, *hi, *hi / *lo));
  return o;
}

Outcome extremal(const AcceptanceOptions& opt) {
  Outcome o;
  if (opt.quick) {
    o.skipped = true;
    o.detail = "skipped in quick mode";
    return o;
  }
  const ExtremalMoments m = extremal_moments(5000, 2.0, 20000, opt.seed + 15, opt.threads);
  o.require(rel_err(m.second, 1.0 / 16.0) <= 0.05, fmt("second %.5f vs 1/16", m.second));
  o.require(rel_err(m.fourth, 3.0 / 256.0) <= 0.10, fmt("fourth %.5f vs 3/256", m.fourth));
  return o;
}

Outcome lln(const AcceptanceOptions& opt) {
  Outcome o;
  LlnOptions lo;
  lo.replicates = 20;
  lo.seed = opt.seed + 16;
  lo.threads = opt.threads;
  for (auto regime : {LlnRegime::sublinear, LlnRegime::proportional, LlnRegime::superlinear}) {
    const LlnTable t = lln_check(regime, {128, 256, 512, 1024}, functions::monomial(1), lo);
    std::string d = to_string(regime) + " distances";
    for (const auto& row : t.rows) d += fmt(" %.2e", row.distance);
    o.require(shrinks_monotonically(t, 1), d);
  }
  return o;
}

struct Entry {
  const char* name;
  std::function<Outcome(const AcceptanceOptions&)> run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      {"bridge-combinatorics", [](const AcceptanceOptions&) { return combinatorics(); }},
      {"path-sum-oracle", [](const AcceptanceOptions& o) { return path_oracle(o.seed); }},
      {"egf-identity", [](const AcceptanceOptions&) { return egf_identity(); }},
      {"eigensolver", [](const AcceptanceOptions& o) { return eigensolver(o.seed); }},
      {"diagonalization", [](const AcceptanceOptions&) { return diagonalization(); }},
      {"laplace-certification", [](const AcceptanceOptions&) { return laplace(); }},
      {"clt-desk-scale", clt},
      {"mean-deviation", [](const AcceptanceOptions&) { return deviation(); }},
      {"palindromy", [](const AcceptanceOptions&) { return palindromy(); }},
      {"zero-temperature-model", [](const AcceptanceOptions&) { return zero_temperature(); }},
      {"measures", [](const AcceptanceOptions&) { return measures(); }},
      {"concentration", concentration},
      {"coupling", [](const AcceptanceOptions&) { return coupling(); }},
      {"trotter-bound", trotter},
      {"extremal-moments", extremal},
      {"lln-regimes", lln},
  };
  return entries;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  if (id < 1 || id > kCriterionCount) throw ValidationError("criterion id must be in 1..16");
  const Entry& entry = registry()[id - 1];
  CriterionResult out;
  out.id = id;
  out.name = entry.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = entry.run(options);
    out.passed = o.passed && !o.skipped;
    out.skipped = o.skipped;
    out.detail = o.detail;
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("exception: ") + e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    out.push_back(run_criterion(id, options));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  const char* status = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
  return fmt("%s %2d %s: ", status, r.id, r.name.c_str()) + r.detail + fmt(" (%.2f s)", r.seconds);
}

}  // namespace betajac
