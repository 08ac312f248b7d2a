#include "betajac/params.hpp"

#include <cmath>
#include <sstream>

#include "betajac/errors.hpp"

namespace betajac {

EnsembleParams::EnsembleParams(int n, double beta, double n1, double n2)
    : n_(n), beta_(beta), n1_(n1), n2_(n2) {
  if (n < 1) throw ValidationError("matrix size n must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ValidationError("beta must be a positive finite number");
  }
  if (!std::isfinite(n1) || !std::isfinite(n2)) {
    throw ValidationError("n1 and n2 must be finite");
  }
  if (n1 < n - 1 || n2 < n - 1) {
    std::ostringstream msg;
    msg << "n1 and n2 must be at least n - 1 = " << (n - 1) << " (got n1=" << n1
        << ", n2=" << n2 << ")";
    throw ValidationError(msg.str());
  }
}

EnsembleParams EnsembleParams::from_pq(int n, double beta, double p, double q) {
  return EnsembleParams(n, beta, p * n, q * n);
}

std::string EnsembleParams::describe() const {
  std::ostringstream out;
  out << "n=" << n_ << " beta=" << beta_ << " n1=" << n1_ << " n2=" << n2_;
  return out.str();
}

AsymptoticParams derive_asymptotic(const EnsembleParams& params) {
  AsymptoticParams out;
  out.p = params.n1() / params.n();
  out.q = params.n2() / params.n();
  out.a = 1.0 / (out.p + out.q);
  out.b = out.p / (out.p + out.q);
  out.alpha = params.alpha();
  out.extremal = out.p + out.q <= 2.0;
  return out;
}

AsymptoticParams AsymptoticParams::from_ab(double a, double b, double beta) {
  if (!(a > 0.0) || !(beta > 0.0)) {
    throw ValidationError("from_ab needs a > 0 and beta > 0");
  }
  AsymptoticParams out;
  out.a = a;
  out.b = b;
  out.p = b / a;
  out.q = (1.0 - b) / a;
  out.alpha = 2.0 / beta;
  out.extremal = out.p + out.q <= 2.0;
  return out;
}

AsymptoticParams AsymptoticParams::involution() const {
  AsymptoticParams out = *this;
  out.a = 1.0 - b;
  out.b = 1.0 - a;
  out.p = out.b / out.a;
  out.q = (1.0 - out.b) / out.a;
  out.extremal = out.p + out.q <= 2.0;
  return out;
}

void AsymptoticParams::require_proportional() const {
  if (extremal || !(a > 0.0 && a < 0.5)) {
    throw ValidationError("asymptotic formulas need 0 < a < 1/2 (p + q > 2)");
  }
  if (b < a || b > 1.0 - a) {
    throw ValidationError("asymptotic formulas need a <= b <= 1 - a (p, q >= 1)");
  }
}

double AsymptoticParams::conditioning() const { return 1.0 / (1.0 - 2.0 * a); }

SupportInterval support_edges(const AsymptoticParams& asym) {
  asym.require_proportional();
  const double u = std::sqrt(asym.b * (1.0 - asym.a));
  const double v = std::sqrt(asym.a * (1.0 - asym.b));
  SupportInterval s;
  s.lambda_plus = (u + v) * (u + v);
  // lambda_- lambda_+ = (b - a)^2 avoids the cancellation in (u - v)^2.
  const double d = asym.b - asym.a;
  s.lambda_minus = s.lambda_plus > 0.0 ? d * d / s.lambda_plus : 0.0;
  return s;
}

}  // namespace betajac
