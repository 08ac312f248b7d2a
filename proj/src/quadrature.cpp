#include "betajac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "betajac/eig.hpp"
#include "betajac/errors.hpp"

namespace betajac {

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
  std::vector<double> terms(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = weights[i] * f(nodes[i]);
  return pairwise_sum(terms);
}

QuadratureRule gauss_from_recurrence(const std::vector<double>& diag, const std::vector<double>& off,
                                     double mass) {
  const int n = static_cast<int>(diag.size());
  if (n < 1 || static_cast<int>(off.size()) != n - 1) {
    throw ValidationError("gauss_from_recurrence: need n diagonal and n - 1 off-diagonal terms");
  }
  QuadratureRule rule;
  rule.nodes = eigenvalues(SymTridiagonal{diag, off}).values;
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    // Orthonormal recurrence with phat_0 = 1; the sum is rescaled by mass.
    double prev = 0.0, cur = 1.0, sum = 1.0;
    for (int k = 0; k + 1 < n; ++k) {
      const double next = ((x - diag[k]) * cur - (k > 0 ? off[k - 1] * prev : 0.0)) / off[k];
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    rule.weights[i] = mass / sum;
    if (!std::isfinite(rule.weights[i])) {
      throw NumericalError("gauss_from_recurrence: non-finite weight");
    }
  }
  return rule;
}

void jacobi01_recurrence(int n, double r, double s, std::vector<double>& diag,
                         std::vector<double>& off) {
  if (n < 1) throw ValidationError("jacobi recurrence: n must be positive");
  if (!(r > -1.0) || !(s > -1.0)) {
    throw ValidationError("jacobi recurrence: exponents must exceed -1");
  }
  // Classical P^(al, be) on [-1, 1] with weight (1-x)^al (1+x)^be, then
  // t = (1 + x)/2 turns it into t^be (1-t)^al.
  const double al = s, be = r;
  const double ab = al + be;
  diag.assign(n, 0.0);
  off.assign(n - 1, 0.0);
  for (int k = 0; k < n; ++k) {
    double ak;
    if (k == 0) {
      ak = (be - al) / (ab + 2.0);
    } else {
      const double t = 2.0 * k + ab;
      ak = (be - al) * (be + al) / (t * (t + 2.0));
    }
    diag[k] = 0.5 * (1.0 + ak);
  }
  for (int k = 1; k < n; ++k) {
    const double t = 2.0 * k + ab;
    double bk2;
    if (k == 1) {
      // (1 + al + be) cancels, which matters when al + be = -1.
      bk2 = 4.0 * (1.0 + al) * (1.0 + be) / (t * t * (t + 1.0));
    } else {
      bk2 = 4.0 * k * (k + al) * (k + be) * (k + ab) / (t * t * (t + 1.0) * (t - 1.0));
    }
    off[k - 1] = 0.5 * std::sqrt(bk2);
  }
  for (double v : off) {
    if (!std::isfinite(v)) throw NumericalError("jacobi recurrence: coefficient overflow");
  }
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  std::vector<double> diag, off;
  jacobi01_recurrence(n, 0.0, 0.0, diag, off);
  auto rule = gauss_from_recurrence(diag, off, 1.0);
  const double len = hi - lo;
  for (auto& x : rule.nodes) x = lo + len * x;
  for (auto& w : rule.weights) w *= len;
  return rule;
}

QuadratureRule gauss_beta(int n, double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) throw ValidationError("gauss_beta: shapes must be positive");
  std::vector<double> diag, off;
  jacobi01_recurrence(n, p - 1.0, q - 1.0, diag, off);
  return gauss_from_recurrence(diag, off, 1.0);
}

QuadratureRule gauss_hermite_normal(int n) {
  std::vector<double> diag(n, 0.0), off(n > 0 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return gauss_from_recurrence(diag, off, 1.0);
}

std::vector<double> theta_nodes(int m) {
  if (m < 1) throw ValidationError("theta_nodes: need at least one node");
  std::vector<double> out(m);
  for (int j = 0; j < m; ++j) out[j] = (j + 0.5) * std::numbers::pi / m;
  return out;
}

double pairwise_sum(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  // Iterative cascade over blocks of eight.
  std::vector<double> level;
  level.reserve((n + 7) / 8);
  for (std::size_t i = 0; i < n; i += 8) {
    double s = 0.0;
    for (std::size_t j = i; j < std::min(n, i + 8); ++j) s += values[j];
    level.push_back(s);
  }
  while (level.size() > 1) {
    std::size_t half = 0;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) level[half++] = level[i] + level[i + 1];
    if (level.size() % 2) level[half++] = level.back();
    level.resize(half);
  }
  return level.front();
}

}  // namespace betajac
