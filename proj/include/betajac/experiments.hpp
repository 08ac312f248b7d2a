#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "betajac/params.hpp"
#include "betajac/paths.hpp"
#include "betajac/spectral.hpp"

namespace betajac {

struct ExperimentConfig {
  EnsembleParams params = EnsembleParams(1, 2.0, 1.0, 1.0);
  std::vector<TestFunction> functions;
  int replicates = 2;
  std::uint64_t seed = 0;
  int threads = 0;  // hint; nonpositive means hardware concurrency
  bool keep_samples = true;
  int chebyshev_terms = 64;  // truncation of the theory series
};

// Limiting covariance of the linear statistics: alpha sum_n n fhat_n ghat_n.
struct TheoryColumns {
  bool available = false;
  std::string note;  // why the comparison was suppressed
  std::vector<double> variance;
  std::vector<std::vector<double>> covariance;
};

struct RunResult {
  std::vector<std::string> tags;
  int replicates = 0;
  std::uint64_t seed = 0;
  int threads_used = 1;
  bool used_power_traces = false;
  // samples[f][r] = tr f(A_r) minus the empirical mean over replicates.
  std::vector<std::vector<double>> samples;
  std::vector<double> means;  // empirical mean of tr f(A)
  std::vector<double> variances;
  std::vector<double> variance_se;
  std::vector<std::vector<double>> covariance;
  std::vector<std::vector<double>> covariance_se;
  std::vector<double> skewness;
  std::vector<double> excess_kurtosis;
  // Kolmogorov-Smirnov distance to a centered normal with the sample
  // variance. Shape diagnostic only.
  std::vector<double> ks_distance;
  TheoryColumns theory;
  double wall_seconds = 0.0;
};

// Samples replicates of every linear statistic on independent ensembles.
// Power traces are used when all functions are low-degree polynomials.
// Eigensolver failures are rethrown as NumericalError naming the replicate.
RunResult run_fluctuations(const ExperimentConfig& config);

// Summary statistics of already-centered (or raw) sample columns; fills
// everything in RunResult except tags, theory and provenance.
void summarize_samples(RunResult& result, std::vector<std::vector<double>> raw);

// Theory columns for the given functions, or an unavailable record for
// extremal parameters and functions outside the CLT hypotheses.
TheoryColumns theory_columns(const std::vector<TestFunction>& funcs, const EnsembleParams& params,
                             int terms);

enum class LlnRegime { sublinear, proportional, superlinear };

LlnRegime parse_regime(const std::string& name);
std::string to_string(LlnRegime regime);

// Degree-of-freedom schedules per regime:
//   sublinear     n1 = n + offset1,  n2 = n + offset2
//   proportional  n1 = p n,          n2 = q n
//   superlinear   n1 = p n^2,        n2 = q n^2
struct LlnOptions {
  double beta = 2.0;
  double p = 2.0;
  double q = 2.0;
  double offset1 = 3.0;
  double offset2 = 3.0;
  int replicates = 20;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct LlnRow {
  int n = 0;
  double n1 = 0.0;
  double n2 = 0.0;
  double target = 0.0;
  double mean_statistic = 0.0;  // replicate mean of (1/n) sum f(lambda_i)
  double distance = 0.0;        // root mean square of (1/n) sum f - target
};

struct LlnTable {
  LlnRegime regime = LlnRegime::proportional;
  // Limit location in the superlinear regime: lim (n1 - n)/(n1 + n2 - 2n).
  double point_mass = 0.0;
  std::vector<LlnRow> rows;
};

EnsembleParams lln_params(LlnRegime regime, int n, const LlnOptions& options);
double lln_target(LlnRegime regime, const TestFunction& f, const LlnOptions& options);
LlnTable lln_check(LlnRegime regime, const std::vector<int>& sizes, const TestFunction& f,
                   const LlnOptions& options);

// True when distances decrease along the table with at most `allowed`
// increases between consecutive rows.
bool shrinks_monotonically(const LlnTable& table, int allowed = 1);

// ||X - Y||_F^2 for symmetric tridiagonals of equal size.
double frobenius_gap_sq(const SymTridiagonal& x, const SymTridiagonal& y);

// Monte Carlo E ||B B^T - B_inf B_inf^T||_F^2, B_inf having every Beta
// variable replaced by its mean.
struct TrotterEstimate {
  double mean = 0.0;
  double se = 0.0;
  int replicates = 0;
};
TrotterEstimate trotter_gap(const EnsembleParams& params, int replicates, std::uint64_t seed,
                            int threads = 0);

// Exact-rational extrapolation of n((1/n) E tr A^k - int x^k dmu) against
// (alpha - 1) int x^k dnu.
struct DeviationReport {
  int k = 0;
  std::vector<int> n_grid;
  double eta0 = 0.0;        // extrapolated limit of (1/n) E tr A^k
  double mu_moment = 0.0;   // int x^k dmu by quadrature
  double deviation = 0.0;   // extrapolated coefficient of 1/n
  double predicted = 0.0;   // (alpha - 1) int x^k dnu
  double residual = 0.0;    // extrapolation error estimate of deviation
  std::string eta0_exact;
  std::string deviation_exact;
};
DeviationReport deviation_check(int k, const RationalParams& params,
                                const std::vector<int>& n_grid = {128, 256, 512});

// Central moments of tr A at p = q = 1 (n1 = n2 = n).
struct ExtremalMoments {
  double second = 0.0;
  double fourth = 0.0;
  double second_se = 0.0;
  double fourth_se = 0.0;
  double predicted_second = 0.0;  // 1 / (8 beta)
  double predicted_fourth = 0.0;  // 3 / (64 beta^2)
  int replicates = 0;
};
ExtremalMoments extremal_moments(int n, double beta, int replicates, std::uint64_t seed,
                                 int threads = 0);

// RFC 4180 field quoting.
std::string csv_field(const std::string& text);

// One row per replicate, one column per function.
void write_samples_csv(std::ostream& out, const RunResult& result);

}  // namespace betajac
