#include "betajac/paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "betajac/errors.hpp"

namespace betajac {

int AlternatingBridge::horizontal_steps() const {
  return static_cast<int>(std::count(steps.begin(), steps.end(), 0));
}

bool AlternatingBridge::is_alternating() const {
  int sum = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int s = steps[i];
    const bool odd = (i % 2 == 0);  // 1-based odd position
    if (odd && s != 0 && s != -1) return false;
    if (!odd && s != 0 && s != 1) return false;
    sum += s;
  }
  return sum == 0 && steps.size() % 2 == 0;
}

bool AlternatingBridge::even_at_every_height() const {
  std::map<int, int> horizontal, crossing;
  int h = 0;
  for (int s : steps) {
    if (s == 0) {
      ++horizontal[h];
    } else {
      ++crossing[std::min(h, h + s)];
    }
    h += s;
  }
  for (const auto& [height, count] : horizontal) {
    if (count % 2) return false;
  }
  for (const auto& [height, count] : crossing) {
    if (count % 2) return false;
  }
  return true;
}

namespace {

void extend(std::vector<int>& steps, int height, int remaining, std::vector<AlternatingBridge>& out) {
  if (remaining == 0) {
    if (height == 0) out.push_back({steps});
    return;
  }
  // Depth below zero can never be repaired with fewer up-steps than needed.
  const int ups_left = (remaining + 1) / 2;
  if (-height > ups_left) return;
  const bool odd = (steps.size() % 2 == 0);
  const int choices[2][2] = {{0, 1}, {-1, 0}};
  for (int s : choices[odd ? 1 : 0]) {
    steps.push_back(s);
    extend(steps, height + s, remaining - 1, out);
    steps.pop_back();
  }
}

}  // namespace

BridgeSet enumerate_bridges(int k) {
  if (k < 0 || k > kMaxBridgeHalfLength) {
    std::ostringstream msg;
    msg << "enumerate_bridges: k must lie in [0, " << kMaxBridgeHalfLength << "] (got " << k << ")";
    throw ValidationError(msg.str());
  }
  BridgeSet set;
  set.k = k;
  std::vector<int> steps;
  steps.reserve(2 * k);
  extend(steps, 0, 2 * k, set.bridges);
  return set;
}

mpz_class WeightPolynomial::exact_coeff(int l) const {
  mpz_class c;
  mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(k), static_cast<unsigned long>(l));
  return c * c;
}

double WeightPolynomial::value(double x, double y) const {
  const double x2 = x * x, y2 = y * y;
  double s = 0.0;
  for (int l = 0; l <= k; ++l) s += coeffs[l] * std::pow(x2, l) * std::pow(y2, k - l);
  return s;
}

double WeightPolynomial::dx(double x, double y) const {
  const double x2 = x * x, y2 = y * y;
  double s = 0.0;
  for (int l = 1; l <= k; ++l) s += coeffs[l] * 2.0 * l * x * std::pow(x2, l - 1) * std::pow(y2, k - l);
  return s;
}

double WeightPolynomial::dy(double x, double y) const {
  const double x2 = x * x, y2 = y * y;
  double s = 0.0;
  for (int l = 0; l < k; ++l) {
    s += coeffs[l] * 2.0 * (k - l) * y * std::pow(x2, l) * std::pow(y2, k - l - 1);
  }
  return s;
}

WeightPolynomial p_poly(int k) {
  if (k < 0) throw ValidationError("p_poly: k must be nonnegative");
  WeightPolynomial p;
  p.k = k;
  p.coeffs.resize(k + 1);
  for (int l = 0; l <= k; ++l) p.coeffs[l] = p.exact_coeff(l).get_d();
  return p;
}

double trace_via_paths(const TridiagonalFactor& factor, int k) {
  if (k < 0 || k > 8) throw ValidationError("trace_via_paths: k must lie in [0, 8]");
  const int n = factor.size();
  if (k == 0) return n;
  const auto set = enumerate_bridges(k);
  double total = 0.0;
  for (int start = 1; start <= n; ++start) {
    double row = 0.0;
    for (const auto& bridge : set.bridges) {
      double w = 1.0;
      int h = start;
      for (int s : bridge.steps) {
        const int next = h + s;
        if (next < 1 || next > n) {
          w = 0.0;
          break;
        }
        w *= factor.entry(std::max(h, next), std::min(h, next));
        h = next;
      }
      row += w;
    }
    total += row;
  }
  return total;
}

std::string to_string(const ExactRational& q) { return q.get_str(); }

namespace {

ExactRational parse_rational(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) {
    ExactRational q;
    if (q.set_str(text, 10) != 0) throw ValidationError("not a rational number: '" + text + "'");
    q.canonicalize();
    if (q.get_den() == 0) throw ValidationError("zero denominator in '" + text + "'");
    return q;
  }
  // Decimal literal read exactly: digits / 10^(fraction length).
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const auto fraction = text.size() - dot - 1;
  if (digits.empty() || digits == "-" ||
      digits.find_first_not_of("0123456789", digits[0] == '-' ? 1 : 0) != std::string::npos) {
    throw ValidationError("not a rational number: '" + text + "'");
  }
  mpz_class num(digits, 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, fraction);
  ExactRational q(num, den);
  q.canonicalize();
  return q;
}

// Pochhammer (x)_m = x (x+1) ... (x+m-1).
ExactRational rising(const ExactRational& x, int m) {
  ExactRational out = 1;
  for (int i = 0; i < m; ++i) out *= x + i;
  return out;
}

// Per-variable Beta moments E[z^u (1-z)^v] for u + v <= kmax.
class MomentTable {
 public:
  MomentTable(const ExactRational& r, const ExactRational& s, int kmax) : kmax_(kmax) {
    values_.resize((kmax + 1) * (kmax + 1));
    for (int u = 0; u <= kmax; ++u) {
      for (int v = 0; u + v <= kmax; ++v) {
        ExactRational m = rising(r, u) * rising(s, v) / rising(r + s, u + v);
        m.canonicalize();
        values_[u * (kmax + 1) + v] = m;
      }
    }
  }
  const ExactRational& at(int u, int v) const { return values_[u * (kmax_ + 1) + v]; }

 private:
  int kmax_;
  std::vector<ExactRational> values_;
};

ExactRational pairwise_sum(std::vector<ExactRational> terms) {
  if (terms.empty()) return 0;
  while (terms.size() > 1) {
    std::size_t half = 0;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) terms[half++] = terms[i] + terms[i + 1];
    if (terms.size() % 2) terms[half++] = terms.back();
    terms.resize(half);
  }
  return terms.front();
}

struct Exponent {
  int var;  // z_i -> i, z'_j -> n + j
  int u;    // power of z
  int v;    // power of 1 - z
};

}  // namespace

RationalParams RationalParams::parse(const std::string& alpha, const std::string& a,
                                     const std::string& b) {
  return {parse_rational(alpha), parse_rational(a), parse_rational(b)};
}

ExactRational expected_trace_exact(const RationalParams& params, int n, int k) {
  if (n < 1) throw ValidationError("expected_trace_exact: n must be positive");
  if (k < 0 || k > 5) throw ValidationError("expected_trace_exact: k must lie in [0, 5]");
  if (sgn(params.alpha) <= 0 || sgn(params.a) <= 0) {
    throw ValidationError("expected_trace_exact: alpha and a must be positive");
  }
  if (k == 0) return n;
  const ExactRational& alpha = params.alpha;
  const ExactRational& a = params.a;
  const ExactRational& b = params.b;
  const ExactRational nn = n;

  std::vector<MomentTable> tables;
  tables.reserve(2 * n);
  tables.emplace_back(0, 1, 0);  // index 0 unused
  auto require_positive = [](const ExactRational& x, const char* what, int idx) {
    if (sgn(x) <= 0) {
      std::ostringstream msg;
      msg << "expected_trace_exact: nonpositive Beta shape " << what << " at index " << idx
          << " (" << x.get_str() << ")";
      throw ValidationError(msg.str());
    }
  };
  for (int i = 1; i <= n; ++i) {
    ExactRational r = (nn * b / a + i - n) / alpha;
    ExactRational s = (nn * (1 - b) / a + i - n) / alpha;
    require_positive(r, "r", i);
    require_positive(s, "s", i);
    tables.emplace_back(r, s, k);
  }
  for (int j = 1; j <= n - 1; ++j) {
    ExactRational r = ExactRational(j) / alpha;
    ExactRational s = (nn / a + j - 2 * n + 1) / alpha;
    require_positive(s, "s'", j);
    tables.emplace_back(r, s, k);
  }

  const auto set = enumerate_bridges(k);
  std::vector<ExactRational> row_sums;
  row_sums.reserve(n);
  std::vector<int> diag_uses(2 * k + 3), sub_uses(2 * k + 3);
  std::vector<Exponent> exps;
  std::vector<ExactRational> path_terms;
  for (int start = 1; start <= n; ++start) {
    path_terms.clear();
    for (const auto& bridge : set.bridges) {
      // Heights are tracked relative to start - k so indices stay nonnegative.
      std::fill(diag_uses.begin(), diag_uses.end(), 0);
      std::fill(sub_uses.begin(), sub_uses.end(), 0);
      const int base = start - k - 1;
      int h = start;
      bool inside = true;
      for (int s : bridge.steps) {
        const int next = h + s;
        if (next < 1 || next > n) {
          inside = false;
          break;
        }
        if (s == 0) {
          ++diag_uses[h - base];
        } else {
          ++sub_uses[std::min(h, next) - base];
        }
        h = next;
      }
      if (!inside) continue;
      exps.clear();
      auto add = [&exps](int var, int u, int v) {
        for (auto& e : exps) {
          if (e.var == var) {
            e.u += u;
            e.v += v;
            return;
          }
        }
        exps.push_back({var, u, v});
      };
      for (int idx = 0; idx < static_cast<int>(diag_uses.size()); ++idx) {
        const int j = idx + base;
        if (diag_uses[idx]) {
          // d_j = c_{n-j+1} s'_{n-j}; the count is even.
          const int half = diag_uses[idx] / 2;
          add(n - j + 1, half, 0);
          if (n - j >= 1) add(n + (n - j), 0, half);
        }
        if (sub_uses[idx]) {
          // e_j = -s_{n-j} c'_{n-j}
          const int half = sub_uses[idx] / 2;
          add(n - j, 0, half);
          add(n + (n - j), half, 0);
        }
      }
      ExactRational term = 1;
      for (const auto& e : exps) term *= tables[e.var].at(e.u, e.v);
      path_terms.push_back(std::move(term));
    }
    row_sums.push_back(pairwise_sum(std::move(path_terms)));
    path_terms = {};
  }
  return pairwise_sum(std::move(row_sums));
}

std::vector<int> geometric_grid(int n0, int levels) {
  if (n0 < 1 || levels < 1) throw ValidationError("geometric_grid: n0 and levels must be positive");
  std::vector<int> grid;
  for (int i = 0; i < levels; ++i) grid.push_back(n0 << i);
  return grid;
}

namespace {

// Polynomial interpolation in h = 1/n through (h_i, f_i): returns P(0), P'(0).
std::pair<ExactRational, ExactRational> fit_at_zero(const std::vector<ExactRational>& h,
                                                    const std::vector<ExactRational>& f) {
  const std::size_t m = h.size();
  ExactRational p0 = 0, p1 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    ExactRational li = 1;
    ExactRational dsum = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      li *= -h[j] / (h[i] - h[j]);
      dsum -= 1 / h[j];
    }
    p0 += f[i] * li;
    p1 += f[i] * li * dsum;
  }
  return {p0, p1};
}

}  // namespace

EtaEstimate eta_extract(int k, const RationalParams& params, const std::vector<int>& n_grid,
                        double max_residual) {
  if (n_grid.size() < 3) throw ValidationError("eta_extract: need at least three grid levels");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
    throw ValidationError("eta_extract: grid must be strictly increasing");
  }
  std::vector<ExactRational> h, f;
  for (int n : n_grid) {
    h.emplace_back(1, n);
    f.push_back(expected_trace_exact(params, n, k) / n);
  }
  EtaEstimate est;
  est.k = k;
  est.n_grid = n_grid;
  std::tie(est.eta0, est.eta1) = fit_at_zero(h, f);
  const std::vector<ExactRational> h_fine(h.begin() + 1, h.end());
  const std::vector<ExactRational> f_fine(f.begin() + 1, f.end());
  const auto [c0, c1] = fit_at_zero(h_fine, f_fine);
  est.residual0 = std::abs(ExactRational(est.eta0 - c0).get_d());
  est.residual1 = std::abs(ExactRational(est.eta1 - c1).get_d());
  if (!(est.residual1 <= max_residual * std::max(1.0, std::abs(est.eta1.get_d())))) {
    std::ostringstream msg;
    msg << "eta_extract: Richardson residual " << est.residual1 << " for eta1 exceeds "
        << max_residual << " (k=" << k << ")";
    throw NumericalError(msg.str());
  }
  return est;
}

}  // namespace betajac
