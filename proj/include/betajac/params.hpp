#pragma once

#include <string>

namespace betajac {

// Finite-n description of the ensemble: matrix size, inverse temperature and
// the two (possibly non-integer) degrees of freedom. Integrability of the
// eigenvalue density needs n1, n2 >= n - 1.
class EnsembleParams {
 public:
  EnsembleParams(int n, double beta, double n1, double n2);

  // n1 = p n, n2 = q n.
  static EnsembleParams from_pq(int n, double beta, double p, double q);

  int n() const { return n_; }
  double beta() const { return beta_; }
  double n1() const { return n1_; }
  double n2() const { return n2_; }
  double alpha() const { return 2.0 / beta_; }

  std::string describe() const;

 private:
  int n_;
  double beta_;
  double n1_;
  double n2_;
};

// Proportional-regime parameters. a = 1/(p+q), b = p/(p+q), alpha = 2/beta.
// `extremal` marks p + q <= 2 (a >= 1/2): such ensembles can still be
// simulated but every asymptotic formula refuses them.
struct AsymptoticParams {
  double p = 0.0;
  double q = 0.0;
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;
  bool extremal = false;

  // Inverse construction from the (a, b) triangle.
  static AsymptoticParams from_ab(double a, double b, double beta);

  // Image under a -> 1 - b, b -> 1 - a. Leaves the support edges fixed.
  AsymptoticParams involution() const;

  // Throws ValidationError unless 0 < a < 1/2 and a <= b <= 1 - a.
  void require_proportional() const;

  // 1/(1 - 2a): growth of the covariance integrand near the extremal
  // boundary. Quadrature results carry this so callers can judge them.
  double conditioning() const;
};

AsymptoticParams derive_asymptotic(const EnsembleParams& params);

struct SupportInterval {
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;

  double center() const { return 0.5 * (lambda_plus + lambda_minus); }
  double half_width() const { return 0.5 * (lambda_plus - lambda_minus); }
  bool contains(double x) const { return x >= lambda_minus && x <= lambda_plus; }
};

// lambda_pm = [sqrt(b(1-a)) +- sqrt(a(1-b))]^2.
SupportInterval support_edges(const AsymptoticParams& asym);

}  // namespace betajac
