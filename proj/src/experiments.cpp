#include "betajac/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "betajac/errors.hpp"
#include "betajac/linear_stats.hpp"
#include "betajac/model.hpp"
#include "betajac/parallel.hpp"
#include "betajac/quadrature.hpp"

namespace betajac {

namespace {

double mean_of(const std::vector<double>& x) { return pairwise_sum(x) / static_cast<double>(x.size()); }

// Mean of prod_i x_i over the columns given.
double mean_of_product(const std::vector<const std::vector<double>*>& cols) {
  const std::size_t m = cols.front()->size();
  std::vector<double> prod(m, 1.0);
  for (const auto* c : cols)
    for (std::size_t r = 0; r < m; ++r) prod[r] *= (*c)[r];
  return mean_of(prod);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_to_normal(std::vector<double> x, double sd) {
  if (!(sd > 0.0)) return 0.0;
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i] / sd);
    d = std::max({d, (i + 1) / m - f, f - i / m});
  }
  return d;
}

std::string replicate_message(std::size_t r, const std::exception& e) {
  return "replicate " + std::to_string(r) + ": " + e.what();
}

}  // namespace

void summarize_samples(RunResult& result, std::vector<std::vector<double>> raw) {
  const std::size_t nf = raw.size();
  const std::size_t m = nf ? raw.front().size() : 0;
  if (m < 2) throw ValidationError("summarize_samples: need at least two replicates");
  const double md = static_cast<double>(m);
  result.replicates = static_cast<int>(m);
  result.means.assign(nf, 0.0);
  result.variances.assign(nf, 0.0);
  result.variance_se.assign(nf, 0.0);
  result.skewness.assign(nf, 0.0);
  result.excess_kurtosis.assign(nf, 0.0);
  result.ks_distance.assign(nf, 0.0);
  for (std::size_t i = 0; i < nf; ++i) {
    const double mu = mean_of(raw[i]);
    result.means[i] = mu;
    for (double& v : raw[i]) v -= mu;
    const auto* c = &raw[i];
    const double m2 = mean_of_product({c, c});
    const double m3 = mean_of_product({c, c, c});
    const double m4 = mean_of_product({c, c, c, c});
    result.variances[i] = m2 * md / (md - 1.0);
    result.variance_se[i] = std::sqrt(std::max(0.0, m4 - m2 * m2) / md);
    if (m2 > 0.0) {
      result.skewness[i] = m3 / std::pow(m2, 1.5);
      result.excess_kurtosis[i] = m4 / (m2 * m2) - 3.0;
    }
    result.ks_distance[i] = ks_to_normal(raw[i], std::sqrt(result.variances[i]));
  }
  result.covariance.assign(nf, std::vector<double>(nf, 0.0));
  result.covariance_se.assign(nf, std::vector<double>(nf, 0.0));
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t j = i; j < nf; ++j) {
      const auto* x = &raw[i];
      const auto* y = &raw[j];
      const double cxy = mean_of_product({x, y});
      const double c2 = mean_of_product({x, y, x, y});
      const double cov = cxy * md / (md - 1.0);
      const double se = std::sqrt(std::max(0.0, c2 - cxy * cxy) / md);
      result.covariance[i][j] = result.covariance[j][i] = cov;
      result.covariance_se[i][j] = result.covariance_se[j][i] = se;
    }
  }
  result.samples = std::move(raw);
}

TheoryColumns theory_columns(const std::vector<TestFunction>& funcs, const EnsembleParams& params,
                             int terms) {
  TheoryColumns out;
  const AsymptoticParams asym = derive_asymptotic(params);
  if (asym.extremal) {
    out.note = "extremal parameters (p + q <= 2): no limiting covariance";
    return out;
  }
  const SupportInterval support = support_edges(asym);
  const std::size_t nf = funcs.size();
  std::vector<ChebyshevCoefficients> coeffs;
  coeffs.reserve(nf);
  for (const auto& f : funcs) coeffs.push_back(cheb_coeffs(f, terms, support));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.available = true;
  out.variance.assign(nf, nan);
  out.covariance.assign(nf, std::vector<double>(nf, nan));
  for (std::size_t i = 0; i < nf; ++i) {
    if (funcs[i].outside_hypotheses) {
      out.note += (out.note.empty() ? "" : "; ") + funcs[i].tag + " lies outside the CLT hypotheses";
      continue;
    }
    for (std::size_t j = 0; j < nf; ++j) {
      if (funcs[j].outside_hypotheses) continue;
      double s = 0.0;
      for (int n = terms; n >= 1; --n) s += n * coeffs[i].fhat[n] * coeffs[j].fhat[n];
      out.covariance[i][j] = asym.alpha * s;
    }
    out.variance[i] = out.covariance[i][i];
  }
  return out;
}

RunResult run_fluctuations(const ExperimentConfig& config) {
  if (config.replicates < 2) throw ValidationError("run_fluctuations: replicates must be at least 2");
  if (config.functions.empty()) throw ValidationError("run_fluctuations: no test functions");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t nf = config.functions.size();
  const std::size_t m = static_cast<std::size_t>(config.replicates);
  std::vector<std::vector<double>> raw(nf, std::vector<double>(m, 0.0));
  parallel_for(m, config.threads, [&](std::size_t r) {
    const ReplicateStreams streams(config.seed, r);
    const SymTridiagonal a = assemble_gram(sample_factor(config.params, streams));
    std::vector<double> v;
    try {
      v = linear_statistics(a, config.functions);
    } catch (const NumericalError& e) {
      throw NumericalError(replicate_message(r, e));
    }
    for (std::size_t i = 0; i < nf; ++i) raw[i][r] = v[i];
  });
  RunResult result;
  for (const auto& f : config.functions) result.tags.push_back(f.tag);
  result.seed = config.seed;
  result.threads_used = resolve_threads(config.threads, m);
  result.used_power_traces = power_trace_eligible(config.functions);
  summarize_samples(result, std::move(raw));
  if (!config.keep_samples) result.samples.clear();
  result.theory = theory_columns(config.functions, config.params, config.chebyshev_terms);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

LlnRegime parse_regime(const std::string& name) {
  if (name == "sublinear") return LlnRegime::sublinear;
  if (name == "proportional" || name == "linear") return LlnRegime::proportional;
  if (name == "superlinear") return LlnRegime::superlinear;
  throw ValidationError("unknown regime '" + name + "' (sublinear, proportional, superlinear)");
}

std::string to_string(LlnRegime regime) {
  switch (regime) {
    case LlnRegime::sublinear:
      return "sublinear";
    case LlnRegime::proportional:
      return "proportional";
    case LlnRegime::superlinear:
      return "superlinear";
  }
  return "unknown";
}

EnsembleParams lln_params(LlnRegime regime, int n, const LlnOptions& o) {
  const double nd = n;
  switch (regime) {
    case LlnRegime::sublinear:
      return EnsembleParams(n, o.beta, nd + o.offset1, nd + o.offset2);
    case LlnRegime::proportional:
      return EnsembleParams(n, o.beta, o.p * nd, o.q * nd);
    case LlnRegime::superlinear:
      return EnsembleParams(n, o.beta, o.p * nd * nd, o.q * nd * nd);
  }
  throw ValidationError("lln_params: unknown regime");
}

double lln_target(LlnRegime regime, const TestFunction& f, const LlnOptions& o) {
  switch (regime) {
    case LlnRegime::sublinear: {
      // Arcsine law on [0, 1]: x = (1 - cos t)/2, t uniform on [0, pi].
      const auto theta = theta_nodes(kDefaultThetaNodes);
      std::vector<double> vals(theta.size());
      for (std::size_t j = 0; j < theta.size(); ++j) vals[j] = f(0.5 * (1.0 - std::cos(theta[j])));
      return mean_of(vals);
    }
    case LlnRegime::proportional: {
      const double s = o.p + o.q;
      return integrate_mu(f, AsymptoticParams::from_ab(1.0 / s, o.p / s, o.beta));
    }
    case LlnRegime::superlinear:
      return f(o.p / (o.p + o.q));
  }
  throw ValidationError("lln_target: unknown regime");
}

LlnTable lln_check(LlnRegime regime, const std::vector<int>& sizes, const TestFunction& f,
                   const LlnOptions& o) {
  if (sizes.empty()) throw ValidationError("lln_check: no sizes");
  if (o.replicates < 1) throw ValidationError("lln_check: replicates must be positive");
  LlnTable table;
  table.regime = regime;
  if (regime == LlnRegime::superlinear) table.point_mass = o.p / (o.p + o.q);
  const double target = lln_target(regime, f, o);
  const std::vector<TestFunction> funcs{f};
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const EnsembleParams params = lln_params(regime, sizes[s], o);
    const std::size_t m = static_cast<std::size_t>(o.replicates);
    std::vector<double> stat(m), sq(m);
    // Each size draws from its own block of replicate indices.
    const std::uint64_t base = static_cast<std::uint64_t>(s) << 32;
    parallel_for(m, o.threads, [&](std::size_t r) {
      const ReplicateStreams streams(o.seed, base + r);
      const SymTridiagonal a = assemble_gram(sample_factor(params, streams));
      double v = 0.0;
      try {
        v = linear_statistics(a, funcs)[0] / params.n();
      } catch (const NumericalError& e) {
        throw NumericalError(replicate_message(r, e));
      }
      stat[r] = v;
      sq[r] = (v - target) * (v - target);
    });
    LlnRow row;
    row.n = params.n();
    row.n1 = params.n1();
    row.n2 = params.n2();
    row.target = target;
    row.mean_statistic = mean_of(stat);
    row.distance = std::sqrt(mean_of(sq));
    table.rows.push_back(row);
  }
  return table;
}

bool shrinks_monotonically(const LlnTable& table, int allowed) {
  int violations = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].distance >= table.rows[i - 1].distance) ++violations;
  return violations <= allowed && table.rows.back().distance < table.rows.front().distance;
}

double frobenius_gap_sq(const SymTridiagonal& x, const SymTridiagonal& y) {
  if (x.size() != y.size()) throw ValidationError("frobenius_gap_sq: size mismatch");
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double d = x.diag[i] - y.diag[i];
    s += d * d;
  }
  for (std::size_t i = 0; i < x.off.size(); ++i) {
    const double d = x.off[i] - y.off[i];
    s += 2.0 * d * d;
  }
  return s;
}

TrotterEstimate trotter_gap(const EnsembleParams& params, int replicates, std::uint64_t seed,
                            int threads) {
  if (replicates < 2) throw ValidationError("trotter_gap: replicates must be at least 2");
  const SymTridiagonal limit = assemble_gram(deterministic_factor(params));
  std::vector<double> gaps(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    const SymTridiagonal a = assemble_gram(sample_factor(params, ReplicateStreams(seed, r)));
    gaps[r] = frobenius_gap_sq(a, limit);
  });
  TrotterEstimate out;
  out.replicates = replicates;
  out.mean = mean_of(gaps);
  std::vector<double> d2(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) d2[i] = (gaps[i] - out.mean) * (gaps[i] - out.mean);
  out.se = std::sqrt(pairwise_sum(d2) / (replicates - 1.0) / replicates);
  return out;
}

DeviationReport deviation_check(int k, const RationalParams& params, const std::vector<int>& n_grid) {
  if (k < 1 || k > 3) throw ValidationError("deviation_check: k must be 1, 2 or 3");
  const EtaEstimate est = eta_extract(k, params, n_grid);
  // mu and nu do not depend on beta; any admissible value builds the support.
  const AsymptoticParams asym = AsymptoticParams::from_ab(params.a_d(), params.b_d(), 2.0);
  const SupportInterval support = support_edges(asym);
  const TestFunction xk = functions::monomial(k);
  DeviationReport out;
  out.k = k;
  out.n_grid = n_grid;
  out.eta0 = est.eta0.get_d();
  out.deviation = est.eta1.get_d();
  out.residual = est.residual1;
  out.mu_moment = integrate_mu(xk, asym);
  out.predicted = (params.alpha_d() - 1.0) * integrate_nu(xk, support);
  out.eta0_exact = to_string(est.eta0);
  out.deviation_exact = to_string(est.eta1);
  return out;
}

ExtremalMoments extremal_moments(int n, double beta, int replicates, std::uint64_t seed,
                                 int threads) {
  if (replicates < 2) throw ValidationError("extremal_moments: replicates must be at least 2");
  const EnsembleParams params(n, beta, n, n);
  std::vector<double> tr(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    tr[r] = gram_trace(sample_factor(params, ReplicateStreams(seed, r)));
  });
  const double mu = mean_of(tr);
  std::vector<double> d2(tr.size()), d4(tr.size()), d8(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double d = tr[i] - mu;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
    d8[i] = d4[i] * d4[i];
  }
  const double m = replicates;
  ExtremalMoments out;
  out.replicates = replicates;
  out.second = mean_of(d2);
  out.fourth = mean_of(d4);
  out.second_se = std::sqrt(std::max(0.0, out.fourth - out.second * out.second) / m);
  out.fourth_se = std::sqrt(std::max(0.0, mean_of(d8) - out.fourth * out.fourth) / m);
  out.predicted_second = 1.0 / (8.0 * beta);
  out.predicted_fourth = 3.0 / (64.0 * beta * beta);
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_samples_csv(std::ostream& out, const RunResult& result) {
  out << "replicate";
  for (const auto& t : result.tags) out << ',' << csv_field(t);
  out << "\r\n";
  if (result.samples.empty()) return;
  std::ostringstream line;
  line.precision(17);
  for (std::size_t r = 0; r < result.samples.front().size(); ++r) {
    line.str("");
    line << r;
    for (const auto& col : result.samples) line << ',' << col[r];
    out << line.str() << "\r\n";
  }
}

}  // namespace betajac
