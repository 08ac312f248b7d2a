#include "betajac/linear_stats.hpp"

#include <algorithm>

#include "betajac/errors.hpp"
#include "betajac/quadrature.hpp"

namespace betajac {

bool power_trace_eligible(const std::vector<TestFunction>& funcs) {
  return std::all_of(funcs.begin(), funcs.end(), [](const TestFunction& f) {
    return f.polynomial_degree >= 0 && f.polynomial_degree <= kMaxPowerTraceDegree &&
           static_cast<int>(f.monomial_coeffs.size()) == f.polynomial_degree + 1;
  });
}

std::vector<double> linear_statistics(const SymTridiagonal& a, const std::vector<TestFunction>& funcs,
                                      const EigOptions& options) {
  std::vector<double> out(funcs.size(), 0.0);
  if (funcs.empty()) return out;
  if (power_trace_eligible(funcs)) {
    int kmax = 0;
    for (const auto& f : funcs) kmax = std::max(kmax, f.polynomial_degree);
    const std::vector<double> traces = power_traces(a, kmax);
    for (std::size_t i = 0; i < funcs.size(); ++i) {
      const auto& c = funcs[i].monomial_coeffs;
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * traces[k];
      out[i] = s;
    }
    return out;
  }
  const Spectrum spec = eigenvalues(a, options);
  std::vector<double> terms(spec.values.size());
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    for (std::size_t j = 0; j < spec.values.size(); ++j) terms[j] = funcs[i](spec.values[j]);
    out[i] = pairwise_sum(terms);
  }
  return out;
}

TestFunction derivative_square(const TestFunction& f) {
  if (!f.has_derivative()) throw ValidationError("derivative_square: " + f.tag + " has no derivative");
  TestFunction g;
  auto d = f.derivative;
  g.value = [d](double x) {
    const double v = d(x);
    return v * v;
  };
  g.tag = "(" + f.tag + ")'^2";
  g.outside_hypotheses = f.outside_hypotheses;
  if (f.polynomial_degree >= 0 && static_cast<int>(f.monomial_coeffs.size()) == f.polynomial_degree + 1) {
    const int deg = f.polynomial_degree;
    std::vector<double> dc(std::max(deg, 1), 0.0);
    for (int k = 1; k <= deg; ++k) dc[k - 1] = k * f.monomial_coeffs[k];
    std::vector<double> sq(2 * dc.size() - 1, 0.0);
    for (std::size_t i = 0; i < dc.size(); ++i)
      for (std::size_t j = 0; j < dc.size(); ++j) sq[i + j] += dc[i] * dc[j];
    g.polynomial_degree = static_cast<int>(sq.size()) - 1;
    g.monomial_coeffs = std::move(sq);
    auto coeffs = g.monomial_coeffs;
    g.derivative = [coeffs](double x) {
      double s = 0.0;
      for (std::size_t k = coeffs.size() - 1; k >= 1; --k) s = s * x + k * coeffs[k];
      return s;
    };
  }
  return g;
}

}  // namespace betajac
