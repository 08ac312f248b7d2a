#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "betajac/eig.hpp"
#include "betajac/errors.hpp"
#include "betajac/experiments.hpp"
#include "betajac/model.hpp"
#include "oracles.hpp"

using namespace betajac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig small_config(int n, double beta, int reps, std::uint64_t seed) {
  ExperimentConfig c;
  c.params = EnsembleParams::from_pq(n, beta, 2.0, 2.0);
  c.replicates = reps;
  c.seed = seed;
  return c;
}

std::vector<TestFunction> gammas(const EnsembleParams& params, int count) {
  const SupportInterval support = support_edges(derive_asymptotic(params));
  std::vector<TestFunction> out;
  for (int i = 1; i <= count; ++i) out.push_back(functions::gamma(i, support));
  return out;
}

}  // namespace

TEST_CASE("constant statistic has no fluctuation", "[experiments]") {
  ExperimentConfig c = small_config(50, 2.0, 20, 1);
  c.functions = {functions::constant(2.5)};
  const RunResult r = run_fluctuations(c);
  REQUIRE(r.samples.size() == 1);
  REQUIRE(r.samples[0].size() == 20);
  for (double x : r.samples[0]) CHECK(std::abs(x) <= 1e-12 * 50);
  CHECK_THAT(r.means[0], WithinRel(125.0, 1e-14));
  CHECK(r.variances[0] <= 1e-20);
}

TEST_CASE("runs are bit-identical across thread counts", "[experiments][property]") {
  ExperimentConfig c = small_config(40, 1.0, 37, 12345);
  c.functions = {functions::monomial(1), functions::sine(2.0)};
  c.threads = 1;
  const RunResult one = run_fluctuations(c);
  c.threads = 4;
  const RunResult four = run_fluctuations(c);
  CHECK(one.samples == four.samples);
  CHECK(one.variances == four.variances);
  CHECK(one.covariance == four.covariance);
  CHECK(one.ks_distance == four.ks_distance);
  c.seed = 12346;
  const RunResult other = run_fluctuations(c);
  CHECK(other.samples != one.samples);
}

TEST_CASE("summary statistics match two-pass formulas", "[experiments]") {
  const std::vector<double> x{1.0, 4.0, -2.0, 0.5, 3.0, 7.0};
  const std::vector<double> y{0.0, 1.0, 1.0, -1.0, 2.0, 5.0};
  RunResult r;
  summarize_samples(r, {x, y});
  const double m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / m;
    my += y[i] / m;
  }
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mx;
    m2 += d * d / m;
    m3 += d * d * d / m;
    m4 += d * d * d * d / m;
    cxy += d * (y[i] - my) / m;
  }
  CHECK_THAT(r.means[0], WithinRel(mx, 1e-14));
  CHECK_THAT(r.variances[0], WithinRel(m2 * m / (m - 1.0), 1e-14));
  CHECK_THAT(r.skewness[0], WithinRel(m3 / std::pow(m2, 1.5), 1e-13));
  CHECK_THAT(r.excess_kurtosis[0], WithinRel(m4 / (m2 * m2) - 3.0, 1e-13));
  CHECK_THAT(r.covariance[0][1], WithinRel(cxy * m / (m - 1.0), 1e-13));
  CHECK(r.covariance[0][1] == r.covariance[1][0]);
  CHECK_THAT(r.samples[0][0], WithinAbs(x[0] - mx, 1e-14));
}

TEST_CASE("KS distance against the fitted normal", "[experiments]") {
  RunResult r;
  summarize_samples(r, {{-1.0, 1.0}});
  // Unbiased variance 2; both points sit 0.5 - Phi(-1/sqrt 2) from the steps.
  const double phi = 0.5 * std::erfc(1.0 / 2.0);
  CHECK_THAT(r.ks_distance[0], WithinAbs(0.5 - phi, 1e-14));
}

TEST_CASE("empirical covariance is symmetric positive semidefinite", "[experiments][property]") {
  ExperimentConfig c = small_config(30, 2.0, 200, 77);
  c.functions = gammas(c.params, 4);
  c.functions.push_back(functions::exponential(1.0));
  const RunResult r = run_fluctuations(c);
  const std::size_t nf = r.covariance.size();
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t j = 0; j < nf; ++j) CHECK(r.covariance[i][j] == r.covariance[j][i]);
  const auto eig = dense_symmetric_eigenvalues(r.covariance);
  CHECK(eig.front() >= -1e-12 * eig.back());
}

TEST_CASE("theory columns diagonalize on the shifted Chebyshev basis", "[experiments]") {
  const EnsembleParams params = EnsembleParams::from_pq(100, 4.0, 2.0, 2.0);
  std::vector<TestFunction> funcs = gammas(params, 4);
  funcs.push_back(functions::monomial(1));
  const TheoryColumns t = theory_columns(funcs, params, 64);
  REQUIRE(t.available);
  for (int i = 0; i < 4; ++i) {
    CHECK_THAT(t.variance[i], WithinRel(0.5 * (i + 1), 1e-12));
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK_THAT(t.covariance[i][j], WithinAbs(0.0, 1e-12));
  }
  // tr A: alpha r^2 / 4 with r = sqrt(3)/4.
  CHECK_THAT(t.variance[4], WithinRel(0.5 * 3.0 / 64.0, 1e-12));
  // x = c + (r/2) Gamma_1, so its covariance with Gamma_1 is alpha r / 2.
  CHECK_THAT(t.covariance[4][0], WithinRel(0.5 * std::sqrt(3.0) / 8.0, 1e-12));
}

TEST_CASE("theory columns are suppressed where the CLT does not apply", "[experiments]") {
  const TheoryColumns extremal =
      theory_columns({functions::monomial(1)}, EnsembleParams::from_pq(50, 2.0, 1.0, 1.0), 32);
  CHECK_FALSE(extremal.available);
  CHECK_FALSE(extremal.note.empty());
  const TheoryColumns pwl = theory_columns(
      {functions::monomial(1), functions::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0})},
      EnsembleParams::from_pq(50, 2.0, 2.0, 2.0), 32);
  REQUIRE(pwl.available);
  CHECK(std::isfinite(pwl.variance[0]));
  CHECK(std::isnan(pwl.variance[1]));
  CHECK(std::isnan(pwl.covariance[0][1]));
  CHECK_FALSE(pwl.note.empty());
}

TEST_CASE("eigenvalue path matches an independent bisection recomputation", "[experiments]") {
  ExperimentConfig c = small_config(25, 2.0, 5, 4242);
  c.functions = {functions::sine(3.0)};
  const RunResult r = run_fluctuations(c);
  CHECK_FALSE(r.used_power_traces);
  std::vector<double> raw;
  for (int rep = 0; rep < 5; ++rep) {
    const SymTridiagonal a = assemble_gram(sample_factor(c.params, ReplicateStreams(4242, rep)));
    double s = 0.0;
    for (double v : bisection_eigenvalues(a)) s += std::sin(3.0 * v);
    raw.push_back(s);
  }
  double mean = 0.0;
  for (double v : raw) mean += v / raw.size();
  for (int rep = 0; rep < 5; ++rep) CHECK_THAT(r.samples[0][rep], WithinAbs(raw[rep] - mean, 1e-11));
}

TEST_CASE("fluctuations of Chebyshev statistics at moderate size", "[experiments][mc]") {
  ExperimentConfig c = small_config(200, 2.0, 2000, 2024);
  c.functions = gammas(c.params, 3);
  const RunResult r = run_fluctuations(c);
  CHECK(r.used_power_traces);
  for (int i = 0; i < 3; ++i) {
    INFO("Gamma_" << i + 1 << " var=" << r.variances[i] << " se=" << r.variance_se[i]);
    CHECK(std::abs(r.variances[i] - (i + 1.0)) <= 4.0 * r.variance_se[i]);
    CHECK(std::abs(r.skewness[i]) <= 4.0 * std::sqrt(6.0 / 2000));
    CHECK(std::abs(r.excess_kurtosis[i]) <= 4.0 * std::sqrt(24.0 / 2000));
  }
  CHECK(std::abs(r.covariance[0][1]) <= 4.0 * r.covariance_se[0][1]);
}

TEST_CASE("run_fluctuations validates its config", "[experiments][errors]") {
  ExperimentConfig c = small_config(10, 2.0, 1, 1);
  c.functions = {functions::monomial(1)};
  CHECK_THROWS_AS(run_fluctuations(c), ValidationError);
  c.replicates = 5;
  c.functions.clear();
  CHECK_THROWS_AS(run_fluctuations(c), ValidationError);
}

TEST_CASE("proportional LLN lands on the mean b", "[experiments][mc]") {
  LlnOptions o;
  o.p = 3.0;
  o.q = 1.0;
  o.replicates = 4;
  o.seed = 8;
  const LlnTable t = lln_check(LlnRegime::proportional, {5000}, functions::monomial(1), o);
  CHECK_THAT(t.rows[0].target, WithinRel(0.75, 1e-12));
  CHECK(t.rows[0].distance <= 0.01);
  CHECK(t.rows[0].n1 == 15000.0);
}

TEST_CASE("LLN targets per regime", "[experiments]") {
  LlnOptions o;
  // Arcsine law on [0, 1]: E x^2 = 3/8.
  CHECK_THAT(lln_target(LlnRegime::sublinear, functions::monomial(2), o), WithinRel(0.375, 1e-12));
  o.p = 1.0;
  o.q = 3.0;
  CHECK_THAT(lln_target(LlnRegime::superlinear, functions::monomial(2), o), WithinRel(1.0 / 16, 1e-15));
  const EnsembleParams sub = lln_params(LlnRegime::sublinear, 100, o);
  CHECK(sub.n1() == 103.0);
  const EnsembleParams sup = lln_params(LlnRegime::superlinear, 100, o);
  CHECK(sup.n1() == 10000.0);
  CHECK(sup.n2() == 30000.0);
}

TEST_CASE("LLN distances shrink in every regime", "[experiments][mc]") {
  LlnOptions o;
  o.replicates = 16;
  o.seed = 99;
  for (auto regime : {LlnRegime::sublinear, LlnRegime::proportional, LlnRegime::superlinear}) {
    const LlnTable t = lln_check(regime, {64, 128, 256, 512}, functions::monomial(1), o);
    INFO(to_string(regime));
    CHECK(shrinks_monotonically(t, 1));
    CHECK(t.rows.back().distance < 0.01);
  }
}

TEST_CASE("regime names round-trip", "[experiments]") {
  for (auto regime : {LlnRegime::sublinear, LlnRegime::proportional, LlnRegime::superlinear})
    CHECK(parse_regime(to_string(regime)) == regime);
  CHECK_THROWS_AS(parse_regime("quadratic"), ValidationError);
}

TEST_CASE("shrinkage check counts violations", "[experiments]") {
  LlnTable t;
  for (double d : {1.0, 0.5, 0.6, 0.2}) t.rows.push_back(LlnRow{0, 0, 0, 0, 0, d});
  CHECK(shrinks_monotonically(t, 1));
  CHECK_FALSE(shrinks_monotonically(t, 0));
}

TEST_CASE("Frobenius gap of a matrix with itself is zero", "[experiments]") {
  const EnsembleParams params = EnsembleParams::from_pq(64, 2.0, 2.0, 2.0);
  const SymTridiagonal a = assemble_gram(deterministic_factor(params));
  CHECK(frobenius_gap_sq(a, a) == 0.0);
  const SymTridiagonal b = assemble_gram(sample_factor(params, ReplicateStreams(1, 0)));
  const auto da = oracle::dense_from(a);
  const auto db = oracle::dense_from(b);
  double s = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) s += (da[i][j] - db[i][j]) * (da[i][j] - db[i][j]);
  CHECK_THAT(frobenius_gap_sq(a, b), WithinRel(s, 1e-12));
}

TEST_CASE("Trotter gap grows at most logarithmically", "[experiments][mc]") {
  std::vector<double> ratios;
  for (int n : {128, 512, 2048}) {
    const TrotterEstimate g = trotter_gap(EnsembleParams::from_pq(n, 2.0, 2.0, 2.0), 50, 31);
    CHECK(g.mean >= 0.0);
    ratios.push_back(g.mean / std::log(n));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo <= 4.0);
}

TEST_CASE("deviation vanishes for the first moment and at beta 2", "[experiments]") {
  const DeviationReport k1 = deviation_check(1, RationalParams::parse("1/2", "1/4", "1/2"));
  CHECK(k1.deviation_exact == "0");
  CHECK_THAT(k1.predicted, WithinAbs(0.0, 1e-12));
  CHECK_THAT(k1.eta0, WithinRel(0.5, 1e-15));
  const DeviationReport b2 = deviation_check(2, RationalParams::parse("1", "1/4", "1/2"));
  CHECK_THAT(b2.deviation, WithinAbs(0.0, 1e-6));
  CHECK_THAT(b2.predicted, WithinAbs(0.0, 1e-15));
}

TEST_CASE("deviation at beta 4 matches the signed measure", "[experiments]") {
  const DeviationReport d = deviation_check(2, RationalParams::parse("1/2", "1/4", "1/2"));
  CHECK_THAT(d.deviation, WithinRel(-3.0 / 128.0, 1e-2));
  CHECK_THAT(d.predicted, WithinRel(-3.0 / 128.0, 1e-10));
  CHECK_THAT(d.eta0, WithinRel(5.0 / 16.0, 1e-8));
  CHECK_THAT(d.mu_moment, WithinRel(5.0 / 16.0, 1e-12));
  CHECK_THROWS_AS(deviation_check(4, RationalParams::parse("1", "1/4", "1/2")), ValidationError);
}

TEST_CASE("extremal moments at beta 1", "[experiments][mc]") {
  const ExtremalMoments m = extremal_moments(400, 1.0, 8000, 5);
  INFO("second=" << m.second << " se=" << m.second_se);
  CHECK_THAT(m.second, WithinRel(1.0 / 8.0, 0.05));
  CHECK(m.predicted_fourth == 3.0 / 64.0);
  CHECK_THAT(m.fourth / (m.second * m.second), WithinRel(3.0, 0.1));
}

TEST_CASE("CSV quoting follows RFC 4180", "[experiments]") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("sample CSV has one row per replicate", "[experiments]") {
  ExperimentConfig c = small_config(12, 2.0, 6, 3);
  c.functions = {functions::monomial(1), functions::polynomial({0.0, 1.0, 1.0}, "x+x^2, odd")};
  const RunResult r = run_fluctuations(c);
  std::ostringstream out;
  write_samples_csv(out, r);
  const std::string text = out.str();
  CHECK(text.rfind("replicate,x,\"x+x^2, odd\"\r\n", 0) == 0);
  std::size_t rows = 0;
  for (std::size_t pos = 0; (pos = text.find("\r\n", pos)) != std::string::npos; pos += 2) ++rows;
  CHECK(rows == 7);
}
