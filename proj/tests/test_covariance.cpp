#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "betajac/covariance.hpp"
#include "betajac/eig.hpp"
#include "betajac/errors.hpp"
#include "betajac/spectral.hpp"
#include "oracles.hpp"

using namespace betajac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AsymptoticParams reference(double beta) { return AsymptoticParams::from_ab(0.25, 0.5, beta); }
const SupportInterval kSupport = support_edges(reference(2.0));
constexpr double kC = 0.5;
const double kR = std::sqrt(3.0) / 4.0;

// Laplace transform of e^{ct} I_k(rt) at omega.
double bessel_laplace(int k, double omega) {
  const double w = omega - kC;
  const double root = std::sqrt(w * w - kR * kR);
  return std::pow(kR, k) / std::pow(w + root, k) / root;
}

}  // namespace

TEST_CASE("x and y along the sigma interval", "[covariance]") {
  const auto asym = reference(2.0);
  CHECK(xy_of_sigma(-0.25, asym).y == 0.0);
  const auto top = xy_of_sigma(0.0, asym);
  CHECK_THAT((top.x + top.y) * (top.x + top.y), WithinAbs(kSupport.lambda_plus, 1e-15));
  for (int i = 0; i <= 1000; ++i) {
    const auto xy = xy_of_sigma(-0.25 * i / 1000.0, asym);
    CHECK(xy.x * xy.x + xy.y * xy.y < 1.0);
  }
  CHECK_THROWS_AS(xy_of_sigma(0.1, asym), ValidationError);
  CHECK_THROWS_AS(xy_of_sigma(-0.3, asym), ValidationError);
}

TEST_CASE("basis change rows", "[covariance]") {
  const auto basis = basis_L(8, kSupport);
  CHECK(basis.L[0][0] == 0.5);
  CHECK_THAT(basis.L[1][0], WithinAbs(kC / 2.0, 1e-16));
  CHECK_THAT(basis.L[1][1], WithinAbs(kR / 2.0, 1e-16));
  CHECK_THAT(basis.L[2][0], WithinAbs(kC * kC / 2.0 + kR * kR / 4.0, 1e-16));
  CHECK_THAT(basis.L[2][1], WithinAbs(kC * kR, 1e-16));
  CHECK_THAT(basis.L[2][2], WithinAbs(kR * kR / 4.0, 1e-16));
  CHECK_THROWS_AS(basis_L(65, kSupport), ValidationError);
}

TEST_CASE("property: basis rows reconstruct monomials and are lower triangular", "[covariance][property]") {
  const auto basis = basis_L(20, kSupport);
  for (int n = 0; n <= 20; ++n) {
    for (int k = n + 1; k <= 20; ++k) CHECK(basis.L[n][k] == 0.0);
    for (double x : {0.0, 0.07, 0.3, 0.5, 0.81, 0.93, 1.0}) {
      CHECK_THAT(basis.reconstruct(n, x, kSupport), WithinAbs(std::pow(x, n), 1e-12));
    }
  }
  // Rows agree with Chebyshev coefficients of the monomials.
  for (int n = 1; n <= 8; ++n) {
    const auto co = cheb_coeffs(functions::monomial(n), n, kSupport);
    for (int k = 1; k <= n; ++k) CHECK_THAT(basis.L[n][k], WithinAbs(co.fhat[k], 1e-14));
    // Gamma_0 = 2, so the constant part carries half the theta-average
    CHECK_THAT(basis.L[n][0], WithinAbs(co.fhat[0] / 2.0, 1e-14));
  }
}

TEST_CASE("theory covariance by hand", "[covariance]") {
  for (double beta : {1.0, 2.0, 4.0}) {
    const double alpha = 2.0 / beta;
    const auto th = theory_covariance(4, beta, kSupport);
    CHECK_THAT(th.at(1, 1), WithinAbs(alpha * kR * kR / 4.0, 1e-16));
    CHECK_THAT(th.at(1, 2), WithinAbs(alpha * (kR / 2.0) * (kC * kR), 1e-16));
    CHECK_THAT(th.at(2, 2), WithinAbs(105.0 * alpha / 2048.0, 1e-16));
    for (int k = 1; k <= 4; ++k)
      for (int l = 1; l <= 4; ++l) CHECK(th.at(k, l) == th.at(l, k));
  }
}

TEST_CASE("adding constants changes no theory entry", "[covariance]") {
  // Lambda_00 = 0: the Gamma_0 components of the rows never contribute, so
  // perturbing column 0 of L leaves alpha L Lambda L^T unchanged.
  auto basis = basis_L(6, kSupport);
  const auto th = theory_covariance(6, 2.0, kSupport);
  for (int k = 1; k <= 6; ++k) basis.L[k][0] += 17.0;
  for (int k = 1; k <= 6; ++k) {
    for (int l = 1; l <= 6; ++l) {
      double s = 0.0;
      for (int m = 0; m <= 6; ++m) s += basis.L[k][m] * m * basis.L[l][m];
      CHECK_THAT(s, WithinAbs(th.at(k, l), 1e-15));
    }
  }
}

TEST_CASE("quadrature covariance matches the diagonalised form", "[covariance]") {
  for (double beta : {4.0, 2.0, 1.0}) {
    const auto asym = reference(beta);
    const auto quad = covariance_matrix(8, asym);
    const auto th = theory_covariance(8, beta, kSupport);
    double worst = 0.0;
    for (int k = 1; k <= 8; ++k)
      for (int l = 1; l <= 8; ++l) worst = std::max(worst, std::abs(quad.at(k, l) - th.at(k, l)));
    CHECK(worst <= 1e-8);
    CHECK_THAT(quad.at(1, 1), WithinAbs(3.0 * asym.alpha / 64.0, 1e-10));
    CHECK_THAT(quad.at(2, 2), WithinAbs(105.0 * asym.alpha / 2048.0, 1e-8));
    CHECK(quad.smallest_eigenvalue() >= -1e-10);
    CHECK(quad.conditioning == 2.0);
  }
}

TEST_CASE("single entries and symmetry", "[covariance]") {
  const auto asym = reference(2.0);
  CHECK_THAT(covariance_entry(1, 1, asym), WithinAbs(3.0 / 64.0, 1e-12));
  for (int k = 1; k <= 5; ++k)
    for (int l = 1; l <= 5; ++l) CHECK(covariance_entry(k, l, asym) == covariance_entry(l, k, asym));
  CHECK_THROWS_AS(covariance_entry(0, 1, asym), ValidationError);
  CHECK_THROWS_AS(covariance_entry(1, 1, AsymptoticParams::from_ab(0.5, 0.5, 2.0)), ValidationError);
}

TEST_CASE("property: diagonalisation away from the reference point", "[covariance][property]") {
  for (double a : {0.1, 0.3, 0.45}) {
    for (double t : {0.0, 0.4, 1.0}) {
      const double b = t == 1.0 ? 1.0 - a : a + t * (1.0 - 2.0 * a);
      const auto asym = AsymptoticParams::from_ab(a, b, 3.0);
      const auto quad = covariance_matrix(6, asym);
      const auto th = theory_covariance(6, 3.0, support_edges(asym));
      INFO("a=" << a << " b=" << b);
      for (int k = 1; k <= 6; ++k)
        for (int l = 1; l <= 6; ++l) CHECK_THAT(quad.at(k, l), WithinAbs(th.at(k, l), 1e-9));
    }
  }
}

TEST_CASE("quadrature error shrinks under node doubling", "[covariance][property]") {
  const auto asym = AsymptoticParams::from_ab(0.4, 0.45, 2.0);
  const double exact = theory_covariance(6, 2.0, support_edges(asym)).at(6, 6);
  double prev = std::abs(covariance_entry_estimate(6, 6, asym, 4).value - exact);
  for (int nodes : {8, 16}) {
    const double err = std::abs(covariance_entry_estimate(6, 6, asym, nodes).value - exact);
    CHECK((err <= 0.5 * prev || err <= 1e-15));
    prev = err;
  }
}

TEST_CASE("closed Laplace forms agree", "[covariance]") {
  const double grid[] = {1.0, 1.25, 2.0, 3.0, 5.0};
  for (double beta : {1.0, 2.0, 4.0}) {
    for (double eta : grid) {
      for (double omega : grid) {
        const auto p = laplace_closed(eta, omega, kSupport, beta);
        INFO("eta=" << eta << " omega=" << omega);
        CHECK_THAT(p.c_form, WithinRel(2.0 / beta * p.t_form, 1e-12));
      }
    }
  }
}

TEST_CASE("removable singularity at eta = omega", "[covariance]") {
  for (double h : {0.0, 1e-9, 1e-6, 3e-5, -3e-5, 1e-3}) {
    const auto p = laplace_closed(2.0 + h, 2.0, kSupport, 2.0);
    CHECK(std::isfinite(p.c_form));
    CHECK_THAT(p.c_form, WithinRel(p.t_form, 1e-11));
  }
}

TEST_CASE("Bessel series oracle", "[covariance]") {
  for (auto [eta, omega] : {std::pair{2.0, 3.0}, std::pair{1.2, 1.1}, std::pair{4.0, 4.0}}) {
    double series = 0.0;
    for (int k = 1; k <= 60; ++k) series += k * bessel_laplace(k, eta) * bessel_laplace(k, omega);
    CHECK_THAT(laplace_closed(eta, omega, kSupport, 2.0).t_form, WithinAbs(series, 1e-10));
  }
}

TEST_CASE("Bessel Laplace transform against direct integration", "[covariance]") {
  for (int k : {1, 2, 5}) {
    const double omega = 2.0;
    auto integrand = [&](double t) {
      return std::exp(-(omega - kC) * t) * oracle::bessel_i(k, kR * t);
    };
    CHECK_THAT(oracle::simpson(integrand, 0.0, 60.0, 20000), WithinRel(bessel_laplace(k, omega), 1e-9));
  }
}

TEST_CASE("transforms decay like omega^-2", "[covariance]") {
  const double eta = 2.0;
  const double v1 = laplace_closed(eta, 1e3, kSupport, 2.0).c_form;
  const double v2 = laplace_closed(eta, 2e3, kSupport, 2.0).c_form;
  CHECK_THAT(v1 / v2, WithinRel(4.0, 1e-2));
  CHECK_THROWS_AS(laplace_closed(0.5, 2.0, kSupport, 2.0), ValidationError);
}

TEST_CASE("partial sums of the covariance series", "[covariance]") {
  const auto cov = covariance_matrix(40, reference(2.0));
  CHECK(cov.smallest_eigenvalue() >= -1e-10);
  const double closed = laplace_closed(2.0, 3.0, kSupport, 2.0).c_form;
  CHECK_THAT(laplace_partial_sum(40, 2.0, 3.0, cov), WithinAbs(closed, 1e-6));
  CHECK(laplace_partial_sum(1, 2.0, 3.0, cov) == cov.at(1, 1) / (4.0 * 9.0));
  double prev = std::abs(laplace_partial_sum(5, 2.0, 3.0, cov) - closed);
  for (int K : {10, 20, 40}) {
    const double err = std::abs(laplace_partial_sum(K, 2.0, 3.0, cov) - closed);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("dense symmetric eigenvalues", "[covariance]") {
  const std::vector<std::vector<double>> m{{2, 1, 0, 0}, {1, 2, 1, 0}, {0, 1, 2, 1}, {0, 0, 1, 2}};
  const auto v = dense_symmetric_eigenvalues(m);
  // 2 + 2 cos(k pi / 5)
  for (int k = 1; k <= 4; ++k) {
    CHECK_THAT(v[4 - k], WithinAbs(2.0 + 2.0 * std::cos(k * std::numbers::pi / 5.0), 1e-14));
  }
  Stream rng(3);
  std::vector<std::vector<double>> full(12, std::vector<double>(12));
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j <= i; ++j) full[i][j] = full[j][i] = rng.uniform() - 0.5;
  const auto ev = dense_symmetric_eigenvalues(full);
  double tr = 0.0, fro = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < 12; ++i) {
    tr += full[i][i];
    for (int j = 0; j < 12; ++j) fro += full[i][j] * full[i][j];
    s1 += ev[i];
    s2 += ev[i] * ev[i];
  }
  CHECK_THAT(s1, WithinAbs(tr, 1e-13));
  CHECK_THAT(s2, WithinAbs(fro, 1e-13));
}
