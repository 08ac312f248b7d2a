#include "betajac/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "betajac/errors.hpp"

namespace betajac {

namespace {

// Marsaglia-Tsang for shape >= 1.
double gamma_large_shape(double shape, Stream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void check_shape(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    std::ostringstream msg;
    msg << "Beta/Gamma shape must be positive and finite (got " << shape << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

double log_gamma_sample(double shape, Stream& rng) {
  check_shape(shape);
  if (shape >= 1.0) return std::log(gamma_large_shape(shape, rng));
  const double boosted = gamma_large_shape(shape + 1.0, rng);
  return std::log(boosted) + std::log(rng.uniform()) / shape;
}

double beta_sample(const BetaSpec& spec, Stream& rng) {
  check_shape(spec.shape1);
  check_shape(spec.shape2);
  if (spec.shape1 >= 1.0 && spec.shape2 >= 1.0) {
    const double x = gamma_large_shape(spec.shape1, rng);
    const double y = gamma_large_shape(spec.shape2, rng);
    return x / (x + y);
  }
  const double lx = log_gamma_sample(spec.shape1, rng);
  const double ly = log_gamma_sample(spec.shape2, rng);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

BetaSpec c_shape(const EnsembleParams& params, int i) {
  const double h = 0.5 * params.beta();
  const int n = params.n();
  return {h * (params.n1() - n + i), h * (params.n2() - n + i)};
}

BetaSpec cprime_shape(const EnsembleParams& params, int j) {
  const double h = 0.5 * params.beta();
  const int n = params.n();
  return {h * j, h * (params.n1() + params.n2() - 2.0 * n + 1.0 + j)};
}

TridiagonalFactor TridiagonalFactor::from_raw(std::vector<double> raw_c,
                                              std::vector<double> raw_cp) {
  const int n = static_cast<int>(raw_c.size());
  if (n < 1 || static_cast<int>(raw_cp.size()) != n - 1) {
    throw ValidationError("factor needs n raw c draws and n - 1 raw c' draws");
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!std::all_of(raw_c.begin(), raw_c.end(), in_unit) ||
      !std::all_of(raw_cp.begin(), raw_cp.end(), in_unit)) {
    throw ValidationError("raw factor draws must lie in [0, 1]");
  }
  TridiagonalFactor f;
  f.diag.resize(n);
  f.sub.resize(n - 1);
  // c_i = sqrt(raw_c[i-1]), c'_j = sqrt(raw_cp[j-1]); s = sqrt(1 - c^2).
  for (int k = 1; k <= n; ++k) {
    const double c = std::sqrt(raw_c[n - k]);
    const double sp = (n - k >= 1) ? std::sqrt(1.0 - raw_cp[n - k - 1]) : 1.0;
    f.diag[k - 1] = c * sp;
  }
  for (int k = 1; k <= n - 1; ++k) {
    const double s = std::sqrt(1.0 - raw_c[n - k - 1]);
    const double cp = std::sqrt(raw_cp[n - k - 1]);
    f.sub[k - 1] = -s * cp;
  }
  f.raw_c = std::move(raw_c);
  f.raw_cp = std::move(raw_cp);
  return f;
}

double TridiagonalFactor::entry(int row, int col) const {
  const int n = size();
  if (row < 1 || col < 1 || row > n || col > n) return 0.0;
  if (row == col) return diag[row - 1];
  if (row == col + 1) return sub[col - 1];
  return 0.0;
}

double SymTridiagonal::trace() const {
  double t = 0.0;
  for (double d : diag) t += d;
  return t;
}

double SymTridiagonal::frobenius_sq() const {
  double t = 0.0;
  for (double d : diag) t += d * d;
  for (double e : off) t += 2.0 * e * e;
  return t;
}

TridiagonalFactor sample_factor(const EnsembleParams& params, const ReplicateStreams& streams) {
  const int n = params.n();
  std::vector<double> raw_c(n), raw_cp(n - 1);
  // Variable index: c_i -> i - 1, c'_j -> n + j - 1.
  for (int i = 1; i <= n; ++i) {
    Stream rng = streams.variable(static_cast<std::uint64_t>(i - 1));
    raw_c[i - 1] = beta_sample(c_shape(params, i), rng);
  }
  for (int j = 1; j <= n - 1; ++j) {
    Stream rng = streams.variable(static_cast<std::uint64_t>(n + j - 1));
    raw_cp[j - 1] = beta_sample(cprime_shape(params, j), rng);
  }
  return TridiagonalFactor::from_raw(std::move(raw_c), std::move(raw_cp));
}

SymTridiagonal assemble_gram(const TridiagonalFactor& factor) {
  const int n = factor.size();
  SymTridiagonal a;
  a.diag.resize(n);
  a.off.resize(n - 1);
  for (int k = 0; k < n; ++k) {
    const double d = factor.diag[k];
    const double e_prev = k > 0 ? factor.sub[k - 1] : 0.0;
    a.diag[k] = d * d + e_prev * e_prev;
    if (k < n - 1) a.off[k] = d * factor.sub[k];
  }
  return a;
}

TridiagonalFactor deterministic_factor(const EnsembleParams& params) {
  const int n = params.n();
  std::vector<double> raw_c(n), raw_cp(n - 1);
  for (int i = 1; i <= n; ++i) raw_c[i - 1] = c_shape(params, i).mean();
  for (int j = 1; j <= n - 1; ++j) raw_cp[j - 1] = cprime_shape(params, j).mean();
  return TridiagonalFactor::from_raw(std::move(raw_c), std::move(raw_cp));
}

namespace {

// Symmetric band matrix with half-bandwidth w, stored row-major as
// n x (2w + 1) with column offset -w..w.
struct Band {
  int n = 0;
  int w = 0;
  std::vector<double> v;

  double at(int i, int j) const {
    const int off = j - i;
    if (j < 0 || j >= n || off < -w || off > w) return 0.0;
    return v[static_cast<std::size_t>(i) * (2 * w + 1) + (off + w)];
  }
};

Band times_tridiagonal(const Band& m, const SymTridiagonal& a) {
  Band out;
  out.n = m.n;
  out.w = m.w + 1;
  const int width = 2 * out.w + 1;
  out.v.assign(static_cast<std::size_t>(out.n) * width, 0.0);
  for (int i = 0; i < out.n; ++i) {
    for (int j = std::max(0, i - out.w); j <= std::min(out.n - 1, i + out.w); ++j) {
      // (M A)_{ij} = M_{i,j-1} A_{j-1,j} + M_{ij} A_{jj} + M_{i,j+1} A_{j+1,j}
      double s = m.at(i, j) * a.diag[j];
      if (j > 0) s += m.at(i, j - 1) * a.off[j - 1];
      if (j + 1 < out.n) s += m.at(i, j + 1) * a.off[j];
      out.v[static_cast<std::size_t>(i) * width + (j - i + out.w)] = s;
    }
  }
  return out;
}

double trace_of_product(const Band& x, const Band& y) {
  // tr(XY) = sum_ij X_ij Y_ji = sum_ij X_ij Y_ij for symmetric Y.
  double s = 0.0;
  const int w = std::min(x.w, y.w);
  for (int i = 0; i < x.n; ++i) {
    for (int j = std::max(0, i - w); j <= std::min(x.n - 1, i + w); ++j) {
      s += x.at(i, j) * y.at(i, j);
    }
  }
  return s;
}

}  // namespace

std::vector<double> power_traces(const SymTridiagonal& a, int kmax) {
  if (kmax < 0) throw ValidationError("power_traces: kmax must be nonnegative");
  const int n = a.size();
  std::vector<double> traces(kmax + 1, 0.0);
  traces[0] = n;
  if (kmax == 0) return traces;
  std::vector<Band> powers;
  Band identity{n, 0, std::vector<double>(n, 1.0)};
  powers.push_back(identity);
  const int half = (kmax + 1) / 2;
  for (int j = 1; j <= half; ++j) powers.push_back(times_tridiagonal(powers.back(), a));
  for (int k = 1; k <= kmax; ++k) {
    const int hi = (k + 1) / 2;
    const int lo = k / 2;
    traces[k] = trace_of_product(powers[hi], powers[lo]);
  }
  return traces;
}

double gram_trace(const TridiagonalFactor& factor) {
  // tr BB^T = sum of squared entries = sum_i c_i^2 (1 - c'_{i-1}^2) + sum_j (1 - c_j^2) c'_j^2
  // with c'_0 = 0; index bookkeeping follows from_raw.
  const int n = factor.size();
  double t = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double sp2 = (i >= 2) ? 1.0 - factor.raw_cp[i - 2] : 1.0;
    t += factor.raw_c[i - 1] * sp2;
  }
  for (int j = 1; j <= n - 1; ++j) t += (1.0 - factor.raw_c[j - 1]) * factor.raw_cp[j - 1];
  return t;
}

void write_factor_csv(std::ostream& out, const TridiagonalFactor& factor) {
  out << "index,raw_c,raw_cp,d,e\n";
  const int n = factor.size();
  out.precision(17);
  for (int i = 0; i < n; ++i) {
    out << (i + 1) << ',' << factor.raw_c[i] << ',';
    if (i < n - 1) out << factor.raw_cp[i];
    out << ',' << factor.diag[i] << ',';
    if (i < n - 1) out << factor.sub[i];
    out << '\n';
  }
}

}  // namespace betajac
