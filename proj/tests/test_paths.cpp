#include <catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "betajac/errors.hpp"
#include "betajac/paths.hpp"
#include "oracles.hpp"

using namespace betajac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

oracle::ShapeList shapes_for(int n, double alpha, double a, double b) {
  oracle::ShapeList sh;
  sh.r.assign(2 * n, 0.0);
  sh.s.assign(2 * n, 0.0);
  for (int i = 1; i <= n; ++i) {
    sh.r[i] = (n * b / a + i - n) / alpha;
    sh.s[i] = (n * (1 - b) / a + i - n) / alpha;
  }
  for (int j = 1; j < n; ++j) {
    sh.r[n + j] = j / alpha;
    sh.s[n + j] = (n / a + j - 2.0 * n + 1) / alpha;
  }
  return sh;
}

}  // namespace

TEST_CASE("k = 1 has exactly the two step pairs", "[paths]") {
  const auto set = enumerate_bridges(1);
  REQUIRE(set.size() == 2);
  CHECK(set.bridges[0].steps == std::vector<int>{-1, 1});
  CHECK(set.bridges[1].steps == std::vector<int>{0, 0});
}

TEST_CASE("bridge counts are central binomials", "[paths]") {
  CHECK(enumerate_bridges(0).size() == 1);
  CHECK(enumerate_bridges(2).size() == 6);
  CHECK(enumerate_bridges(5).size() == 252);
  for (int k = 0; k <= 10; ++k) CHECK(enumerate_bridges(k).size() == oracle::binomial_u64(2 * k, k));
  CHECK_THROWS_AS(enumerate_bridges(11), ValidationError);
  CHECK_THROWS_AS(enumerate_bridges(-1), ValidationError);
}

TEST_CASE("enumeration matches brute force exactly", "[paths][property]") {
  for (int k = 0; k <= 8; ++k) {
    std::set<std::vector<int>> mine;
    for (const auto& b : enumerate_bridges(k).bridges) mine.insert(b.steps);
    const auto brute = oracle::brute_force_bridges(k);
    const std::set<std::vector<int>> reference(brute.begin(), brute.end());
    CHECK(mine.size() == enumerate_bridges(k).size());  // no duplicates
    CHECK(mine == reference);
  }
}

TEST_CASE("property: every bridge alternates and is even at every height", "[paths][property]") {
  for (int k = 0; k <= 8; ++k) {
    for (const auto& b : enumerate_bridges(k).bridges) {
      REQUIRE(b.length() == 2 * k);
      REQUIRE(b.is_alternating());
      REQUIRE(b.even_at_every_height());
    }
  }
  AlternatingBridge fine{{0, 1, -1, 0}};
  CHECK(fine.is_alternating());
  AlternatingBridge bad{{1, -1}};  // odd step +1 is illegal
  CHECK_FALSE(bad.is_alternating());
  AlternatingBridge uneven{{0, 1, 0, -1}};  // even step -1 is illegal
  CHECK_FALSE(uneven.is_alternating());
}

TEST_CASE("weight polynomials", "[paths]") {
  CHECK(p_poly(1).coeffs == std::vector<double>{1, 1});
  CHECK(p_poly(2).coeffs == std::vector<double>{1, 4, 1});
  CHECK(p_poly(3).coeffs == std::vector<double>{1, 9, 9, 1});
  CHECK(p_poly(0).value(0.3, 0.7) == 1.0);
  const auto p2 = p_poly(2);
  CHECK(p2.dx(1.0, 1.0) == 12.0);
  const double fd = oracle::central_difference([&](double x) { return p2.value(x, 1.0); }, 1.0);
  CHECK_THAT(p2.dx(1.0, 1.0), WithinAbs(fd, 1e-5));
  CHECK(p_poly(40).exact_coeff(20) == mpz_class("19001665507723090592400"));
}

TEST_CASE("property: weight sum over bridges equals p_k as exact integers", "[paths][property]") {
  const std::pair<long, long> points[] = {{1, 1}, {2, 1}, {1, 3}};
  for (int k = 0; k <= 8; ++k) {
    const auto set = enumerate_bridges(k);
    const auto p = p_poly(k);
    for (auto [x, y] : points) {
      mpz_class by_bridges = 0;
      for (const auto& b : set.bridges) {
        mpz_class term, xp, yp;
        mpz_ui_pow_ui(xp.get_mpz_t(), x, b.horizontal_steps());
        mpz_ui_pow_ui(yp.get_mpz_t(), y, 2 * k - b.horizontal_steps());
        by_bridges += xp * yp;
      }
      mpz_class by_poly = 0;
      for (int l = 0; l <= k; ++l) {
        mpz_class xp, yp;
        mpz_ui_pow_ui(xp.get_mpz_t(), x, 2 * l);
        mpz_ui_pow_ui(yp.get_mpz_t(), y, 2 * (k - l));
        by_poly += p.exact_coeff(l) * xp * yp;
      }
      CHECK(by_bridges == by_poly);
    }
  }
}

TEST_CASE("property: derivatives match finite differences", "[paths][property]") {
  Stream rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 12;
    const double x = 0.1 + 0.8 * rng.uniform(), y = 0.1 + 0.8 * rng.uniform();
    const auto p = p_poly(k);
    const double fx = oracle::central_difference([&](double t) { return p.value(t, y); }, x);
    const double fy = oracle::central_difference([&](double t) { return p.value(x, t); }, y);
    CHECK(std::abs(p.dx(x, y) - fx) <= 1e-5 * std::max(1.0, std::abs(fx)));
    CHECK(std::abs(p.dy(x, y) - fy) <= 1e-5 * std::max(1.0, std::abs(fy)));
  }
}

TEST_CASE("exponential generating function identity", "[paths]") {
  const double x = 0.3, y = 0.5, t = 0.7;
  double sum = 0.0, fact = 1.0;
  for (int k = 0; k <= 12; ++k) {
    if (k > 0) fact *= k;
    sum += std::pow(t, k) * p_poly(k).value(x, y) / fact;
  }
  const double closed = std::exp(t * (x * x + y * y)) * oracle::bessel_i(0, 2 * x * y * t);
  CHECK_THAT(sum, WithinAbs(closed, 1e-10));
}

TEST_CASE("path traces in small cases", "[paths]") {
  const auto one = TridiagonalFactor::from_raw({0.3}, {});
  for (int k = 0; k <= 8; ++k) CHECK_THAT(trace_via_paths(one, k), WithinRel(std::pow(0.3, k), 1e-14));
  // n = 2, k = 1: c_2^2 s'_1^2 + s_1^2 c'_1^2 + c_1^2
  const auto two = TridiagonalFactor::from_raw({0.3, 0.6}, {0.2});
  CHECK_THAT(trace_via_paths(two, 1), WithinAbs(0.6 * 0.8 + 0.7 * 0.2 + 0.3, 1e-15));
}

TEST_CASE("path traces match dense powers", "[paths][property]") {
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + rep % 16;
    const auto f = sample_factor(EnsembleParams::from_pq(n, 1.0 + rep % 3, 2.0, 1.5),
                                 ReplicateStreams(606, rep));
    const auto b = oracle::dense_factor(f.raw_c, f.raw_cp);
    const auto a = oracle::multiply(b, oracle::transpose(b));
    for (int k = 1; k <= 6; ++k) {
      CHECK(oracle::relative_gap(trace_via_paths(f, k), oracle::dense_power_trace(a, k)) <= 1e-10);
    }
  }
}

TEST_CASE("exact expected trace: hand-computed values", "[paths]") {
  const auto p = RationalParams::parse("1", "1/4", "1/2");
  // (1/2)(6/7) + (1/2)(1/7) + 1/2
  CHECK(expected_trace_exact(p, 2, 1) == 1);
  CHECK(expected_trace_exact(p, 64, 1) == 32);
  CHECK(expected_trace_exact(p, 7, 0) == 7);
  // n = 1: E (c_1^2)^2 = (r)_2 / (r+s)_2 with r = nb/(alpha a), s = n(1-b)/(alpha a)
  const ExactRational r = 2, s = 2;
  CHECK(expected_trace_exact(p, 1, 2) == r * (r + 1) / ((r + s) * (r + s + 1)));
}

TEST_CASE("exact expected trace matches the walk-expansion oracle", "[paths][property]") {
  const char* alphas[] = {"1", "1/2", "2", "3/7"};
  const char* bs[] = {"1/2", "1/3", "3/5"};
  for (const char* al : alphas) {
    for (const char* bb : bs) {
      const auto p = RationalParams::parse(al, "1/4", bb);
      for (int n = 1; n <= 5; ++n) {
        const auto sh = shapes_for(n, p.alpha_d(), p.a_d(), p.b_d());
        for (int k = 1; k <= 5; ++k) {
          INFO("alpha=" << al << " b=" << bb << " n=" << n << " k=" << k);
          const double exact = expected_trace_exact(p, n, k).get_d();
          CHECK(oracle::relative_gap(exact, oracle::expected_trace_by_walks(n, k, sh)) <= 1e-13);
        }
      }
    }
  }
}

TEST_CASE("exact expected trace matches a Monte Carlo mean", "[paths]") {
  const auto p = RationalParams::parse("1", "1/4", "1/2");
  const int n = 6, reps = 40000;
  const auto params = EnsembleParams::from_pq(n, 2.0, 2.0, 2.0);
  for (int k = 2; k <= 3; ++k) {
    double sum = 0.0, sum2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const double t = trace_via_paths(sample_factor(params, ReplicateStreams(1, rep)), k);
      sum += t;
      sum2 += t * t;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
    CHECK(std::abs(mean - expected_trace_exact(p, n, k).get_d()) <= 3.0 * se);
  }
}

TEST_CASE("exact pipeline rejects bad input", "[paths]") {
  const auto p = RationalParams::parse("1", "1/4", "1/2");
  CHECK_THROWS_AS(expected_trace_exact(p, 4, 6), ValidationError);
  CHECK_THROWS_AS(expected_trace_exact(p, 0, 1), ValidationError);
  // b < a makes the c shapes negative for large i - n offsets
  const auto bad = RationalParams::parse("1", "1/4", "1/10");
  CHECK_THROWS_AS(expected_trace_exact(bad, 8, 1), ValidationError);
  CHECK_THROWS_AS(RationalParams::parse("x", "1/4", "1/2"), ValidationError);
  CHECK(RationalParams::parse("0.25", "0.125", "-1.5").alpha == ExactRational(1, 4));
  CHECK(RationalParams::parse("0.25", "0.125", "-1.5").b == ExactRational(-3, 2));
}

TEST_CASE("eta extraction: first moments", "[paths]") {
  const auto p = RationalParams::parse("1/2", "1/4", "1/2");
  const auto est = eta_extract(1, p, geometric_grid(64, 3));
  CHECK(est.eta0 == ExactRational(1, 2));
  CHECK(est.eta1 == 0);
  CHECK(est.residual1 == 0.0);
}

TEST_CASE("eta extraction: second moment deviation is a multiple of 1 - alpha", "[paths]") {
  const auto grid = geometric_grid(128, 3);
  const auto e1 = eta_extract(2, RationalParams::parse("1", "1/4", "1/2"), grid);
  CHECK(std::abs(e1.eta1.get_d()) <= 1e-6);
  const auto e_half = eta_extract(2, RationalParams::parse("1/2", "1/4", "1/2"), grid);
  const auto e_two = eta_extract(2, RationalParams::parse("2", "1/4", "1/2"), grid);
  CHECK_THAT(e_two.eta1.get_d(), WithinRel(-2.0 * e_half.eta1.get_d(), 1e-3));
  // (alpha - 1) r^2/4 at alpha = 1/2
  CHECK_THAT(e_half.eta1.get_d(), WithinRel(-3.0 / 128.0, 1e-2));
}

TEST_CASE("eta extraction: alpha -> 0 by linear fit", "[paths]") {
  const auto grid = geometric_grid(128, 3);
  const double q1 = eta_extract(2, RationalParams::parse("1/4", "1/4", "1/2"), grid).eta1.get_d();
  const double q2 = eta_extract(2, RationalParams::parse("1/2", "1/4", "1/2"), grid).eta1.get_d();
  const double at_zero = q1 - (q2 - q1);  // line through alpha = 1/4 and 1/2
  CHECK_THAT(at_zero, WithinRel(-3.0 / 64.0, 1e-4));
}

TEST_CASE("property: palindromy for k <= 3", "[paths][property]") {
  const auto grid = geometric_grid(128, 3);
  for (int k = 1; k <= 3; ++k) {
    const double two = eta_extract(k, RationalParams::parse("2", "1/4", "1/2"), grid).eta1.get_d();
    const double half = eta_extract(k, RationalParams::parse("1/2", "1/4", "1/2"), grid).eta1.get_d();
    INFO("k=" << k);
    CHECK(std::abs(two + 2.0 * half) <= 1e-3 * std::max(std::abs(two), 1e-12));
  }
}

TEST_CASE("eta extraction validates its grid", "[paths]") {
  const auto p = RationalParams::parse("1", "1/4", "1/2");
  CHECK_THROWS_AS(eta_extract(2, p, {64, 128}), ValidationError);
  CHECK_THROWS_AS(eta_extract(2, p, {64, 32, 128}), ValidationError);
  // A tiny tolerance cannot be met at coarse levels.
  CHECK_THROWS_AS(eta_extract(2, RationalParams::parse("2", "1/4", "1/2"), {4, 8, 16}, 1e-12),
                  NumericalError);
  CHECK(geometric_grid(512, 3) == std::vector<int>{512, 1024, 2048});
}
