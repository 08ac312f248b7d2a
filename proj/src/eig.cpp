#include "betajac/eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace betajac {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_finite(const SymTridiagonal& a) {
  if (a.off.size() + 1 != a.diag.size() && !(a.diag.empty() && a.off.empty())) {
    throw ValidationError("tridiagonal matrix needs n diagonal and n - 1 off-diagonal entries");
  }
  for (double v : a.diag) {
    if (!std::isfinite(v)) throw NumericalError("eigenvalues: non-finite diagonal entry");
  }
  for (double v : a.off) {
    if (!std::isfinite(v)) throw NumericalError("eigenvalues: non-finite off-diagonal entry");
  }
}

// Returns the index that failed to converge, or -1.
int implicit_ql(std::vector<double>& d, std::vector<double>& e, int cap) {
  const int n = static_cast<int>(d.size());
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == cap) return l;
        // Wilkinson shift from the leading 2x2 block.
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  return -1;
}

}  // namespace

double norm_inf(const SymTridiagonal& a) {
  const int n = a.size();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = std::abs(a.diag[i]);
    if (i > 0) row += std::abs(a.off[i - 1]);
    if (i < n - 1) row += std::abs(a.off[i]);
    best = std::max(best, row);
  }
  return best;
}

int sturm_count(const SymTridiagonal& a, double x) {
  const int n = a.size();
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, norm_inf(a));
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < n; ++i) {
    const double e2 = i > 0 ? a.off[i - 1] * a.off[i - 1] : 0.0;
    q = a.diag[i] - x - (i > 0 ? e2 / q : 0.0);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> bisection_eigenvalues(const SymTridiagonal& a, double tol) {
  check_finite(a);
  const int n = a.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(a.off[i - 1]);
    if (i < n - 1) radius += std::abs(a.off[i]);
    lo = std::min(lo, a.diag[i] - radius);
    hi = std::max(hi, a.diag[i] + radius);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double width = std::max(tol * scale, 4.0 * kEps * scale) + std::numeric_limits<double>::min();
  lo -= width;
  hi += width;
  for (int k = 0; k < n; ++k) {
    // k-th smallest: smallest x with sturm_count(x) > k.
    double left = lo, right = hi;
    for (int it = 0; it < 200 && right - left > width; ++it) {
      const double mid = 0.5 * (left + right);
      if (mid == left || mid == right) break;
      if (sturm_count(a, mid) > k) {
        right = mid;
      } else {
        left = mid;
      }
    }
    out[k] = 0.5 * (left + right);
  }
  return out;
}

Spectrum eigenvalues(const SymTridiagonal& a, const EigOptions& options) {
  check_finite(a);
  const int n = a.size();
  Spectrum spec;
  std::vector<double> d = a.diag;
  std::vector<double> e(n, 0.0);
  std::copy(a.off.begin(), a.off.end(), e.begin());
  const int failed = implicit_ql(d, e, options.max_sweeps_per_value);
  if (failed >= 0) {
    if (!options.bisection_fallback) {
      std::ostringstream msg;
      msg << "implicit QL did not converge for eigenvalue index " << failed << " after "
          << options.max_sweeps_per_value << " sweeps";
      throw NonConvergence(msg.str(), failed);
    }
    d = bisection_eigenvalues(a, options.tol);
    spec.used_bisection = true;
  }
  std::sort(d.begin(), d.end());
  double sum_values = 0.0;
  for (double v : d) sum_values += v;
  spec.residual_trace_error = std::abs(sum_values - a.trace());
  spec.values = std::move(d);
  return spec;
}

}  // namespace betajac

namespace betajac {

std::vector<double> dense_symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != n) throw ValidationError("matrix must be square");
  }
  if (n == 0) return {};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (!std::isfinite(a[i][j]) || !std::isfinite(a[j][i])) {
        throw NumericalError("dense_symmetric_eigenvalues: non-finite entry");
      }
      const double avg = 0.5 * (a[i][j] + a[j][i]);
      a[i][j] = a[j][i] = avg;
    }
  }
  // Householder: annihilate column k below the subdiagonal.
  SymTridiagonal t;
  t.diag.resize(n);
  t.off.resize(n - 1);
  std::vector<double> v(n), p(n);
  for (int k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (int i = k + 1; i < n; ++i) alpha += a[i][k] * a[i][k];
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a[k + 1][k] > 0) alpha = -alpha;
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = a[k + 1][k] - alpha;
    for (int i = k + 2; i < n; ++i) v[i] = a[i][k];
    double vnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    // A <- H A H with H = I - 2 v v^T / |v|^2
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += a[i][j] * v[j];
      p[i] = 2.0 * s / vnorm2;
    }
    double vp = 0.0;
    for (int i = k + 1; i < n; ++i) vp += v[i] * p[i];
    const double kcoef = vp / vnorm2;
    for (int i = 0; i < n; ++i) p[i] -= kcoef * v[i];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] -= v[i] * p[j] + p[i] * v[j];
    }
  }
  for (int i = 0; i < n; ++i) t.diag[i] = a[i][i];
  for (int i = 0; i + 1 < n; ++i) t.off[i] = a[i + 1][i];
  return eigenvalues(t).values;
}

}  // namespace betajac
