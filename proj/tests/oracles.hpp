#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "betajac/model.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(int n) { return Dense(n, std::vector<double>(n, 0.0)); }

inline Dense multiply(const Dense& x, const Dense& y) {
  const int n = static_cast<int>(x.size());
  Dense out = zeros(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) out[i][j] += x[i][k] * y[k][j];
  return out;
}

inline Dense transpose(const Dense& x) {
  const int n = static_cast<int>(x.size());
  Dense out = zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[j][i] = x[i][j];
  return out;
}

inline double trace(const Dense& x) {
  double t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) t += x[i][i];
  return t;
}

// Dense B from the raw Beta draws, written straight from the matrix display:
// B(k,k) = c_{n-k+1} s'_{n-k}, B(k+1,k) = -s_{n-k} c'_{n-k}, 1-based.
inline Dense dense_factor(const std::vector<double>& raw_c, const std::vector<double>& raw_cp) {
  const int n = static_cast<int>(raw_c.size());
  auto c = [&](int i) { return std::sqrt(raw_c[i - 1]); };
  auto s = [&](int i) { return std::sqrt(1.0 - raw_c[i - 1]); };
  auto cp = [&](int j) { return std::sqrt(raw_cp[j - 1]); };
  auto sp = [&](int j) { return j == 0 ? 1.0 : std::sqrt(1.0 - raw_cp[j - 1]); };
  Dense b = zeros(n);
  for (int k = 1; k <= n; ++k) {
    b[k - 1][k - 1] = c(n - k + 1) * sp(n - k);
    if (k < n) b[k][k - 1] = -s(n - k) * cp(n - k);
  }
  return b;
}

inline Dense dense_from(const betajac::SymTridiagonal& a) {
  const int n = a.size();
  Dense out = zeros(n);
  for (int i = 0; i < n; ++i) {
    out[i][i] = a.diag[i];
    if (i + 1 < n) out[i][i + 1] = out[i + 1][i] = a.off[i];
  }
  return out;
}

inline double dense_power_trace(const Dense& a, int k) {
  const int n = static_cast<int>(a.size());
  Dense p = zeros(n);
  for (int i = 0; i < n; ++i) p[i][i] = 1.0;
  for (int i = 0; i < k; ++i) p = multiply(p, a);
  return trace(p);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

// I_nu(x) by its power series.
inline double bessel_i(int nu, double x) {
  double term = std::pow(x / 2.0, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int m = 1; m < 400; ++m) {
    term *= (x * x / 4.0) / (static_cast<double>(m) * (m + nu));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// E[Y^m] for Y ~ Beta(r, s): prod_{i<m} (r+i)/(r+s+i).
inline double beta_raw_moment(double r, double s, int m) {
  double out = 1.0;
  for (int i = 0; i < m; ++i) out *= (r + i) / (r + s + i);
  return out;
}

inline double central_difference(const std::function<double(double)>& f, double x,
                                  double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Composite Simpson on [lo, hi] with an even panel count.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / panels;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

inline double relative_gap(double x, double y) {
  const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
  return std::abs(x - y) / scale;
}

}  // namespace oracle

namespace oracle {

// Bridges by brute force over all 2^(2k) sign patterns: odd positions pick
// from {0, -1}, even positions from {0, +1}; keep those summing to zero.
inline std::vector<std::vector<int>> brute_force_bridges(int k) {
  std::vector<std::vector<int>> out;
  const int len = 2 * k;
  for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
    std::vector<int> steps(len);
    int sum = 0;
    for (int i = 0; i < len; ++i) {
      const bool move = (mask >> i) & 1u;
      steps[i] = move ? (i % 2 == 0 ? -1 : 1) : 0;
      sum += steps[i];
    }
    if (sum == 0) out.push_back(steps);
  }
  return out;
}

// E tr A^k by expanding closed walks on the tridiagonal A itself (rather than
// bridges on B) into monomials in the raw Beta variables. Shapes are passed
// per variable: z_i for i = 1..n, z'_j stored at index n + j.
struct ShapeList {
  std::vector<double> r;
  std::vector<double> s;
};

namespace detail {

struct Monomial {
  std::vector<int> u;    // power of z
  std::vector<int> v;    // power of 1 - z
  std::vector<int> off;  // traversals of A_{j,j+1}
};

inline double beta_mixed_moment(double r, double s, int u, int v) {
  double e = 1.0;
  for (int t = 0; t < u; ++t) e *= (r + t) / (r + s + t);
  for (int t = 0; t < v; ++t) e *= (s + t) / (r + s + u + t);
  return e;
}

inline void walk(int n, int k, int start, int pos, int h, const ShapeList& shapes, Monomial& mono,
                 double& total) {
  auto cp = [&](int j) { return j >= 1 ? n + j : 0; };
  if (pos == k) {
    if (h != start) return;
    Monomial m = mono;
    // A_{j,j+1}^2 = z_{n-j+1} (1 - z'_{n-j}) (1 - z_{n-j}) z'_{n-j}; closed
    // walks cross each edge an even number of times and signs cancel.
    for (int j = 1; j < n; ++j) {
      const int half = m.off[j] / 2;
      m.u[n - j + 1] += half;
      m.v[cp(n - j)] += half;
      m.v[n - j] += half;
      m.u[cp(n - j)] += half;
    }
    double e = 1.0;
    for (std::size_t i = 1; i < m.u.size(); ++i) {
      e *= beta_mixed_moment(shapes.r[i], shapes.s[i], m.u[i], m.v[i]);
    }
    total += e;
    return;
  }
  if (std::abs(h - start) > k - pos) return;
  for (int step = -1; step <= 1; ++step) {
    const int next = h + step;
    if (next < 1 || next > n) continue;
    if (step == 0) {
      // A_hh = z_{n-h+1} (1 - z'_{n-h}) + (1 - z_{n-h+1}) z'_{n-h+1}
      {
        Monomial m = mono;
        m.u[n - h + 1] += 1;
        if (n - h >= 1) m.v[cp(n - h)] += 1;
        walk(n, k, start, pos + 1, next, shapes, m, total);
      }
      if (h >= 2) {
        Monomial m = mono;
        m.v[n - h + 1] += 1;
        m.u[cp(n - h + 1)] += 1;
        walk(n, k, start, pos + 1, next, shapes, m, total);
      }
    } else {
      Monomial m = mono;
      m.off[std::min(h, next)] += 1;
      walk(n, k, start, pos + 1, next, shapes, m, total);
    }
  }
}

}  // namespace detail

inline double expected_trace_by_walks(int n, int k, const ShapeList& shapes) {
  double total = 0.0;
  for (int start = 1; start <= n; ++start) {
    detail::Monomial m{std::vector<int>(2 * n, 0), std::vector<int>(2 * n, 0),
                       std::vector<int>(n + 1, 0)};
    detail::walk(n, k, start, 0, start, shapes, m, total);
  }
  return total;
}

}  // namespace oracle
