#include "betajac/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "betajac/acceptance.hpp"
#include "betajac/concentration.hpp"
#include "betajac/covariance.hpp"
#include "betajac/eig.hpp"
#include "betajac/errors.hpp"
#include "betajac/experiments.hpp"
#include "betajac/model.hpp"
#include "betajac/paths.hpp"
#include "betajac/quadrature.hpp"
#include "betajac/spectral.hpp"
#include "betajac/version.hpp"

namespace betajac::cli {

using json = nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& spec) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : spec) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Splits "gamma12" into ("gamma", 12); false without a numeric suffix.
bool split_suffix(const std::string& s, std::string& prefix, int& number) {
  const auto pos = s.find_last_not_of("0123456789");
  if (pos == std::string::npos || pos + 1 == s.size()) return false;
  prefix = s.substr(0, pos + 1);
  number = std::stoi(s.substr(pos + 1));
  return true;
}

}  // namespace

std::vector<std::string> expand_function_names(const std::string& spec) {
  std::vector<std::string> out;
  for (const auto& item : split_list(spec)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(item);
      continue;
    }
    std::string p1, p2;
    int lo = 0, hi = 0;
    const std::string left = item.substr(0, dots);
    std::string right = item.substr(dots + 2);
    if (!split_suffix(left, p1, lo)) throw ValidationError("bad function range '" + item + "'");
    if (right.find_first_not_of("0123456789") == std::string::npos) right = p1 + right;
    if (!split_suffix(right, p2, hi) || p1 != p2 || hi < lo)
      throw ValidationError("bad function range '" + item + "'");
    for (int i = lo; i <= hi; ++i) out.push_back(p1 + std::to_string(i));
  }
  if (out.empty()) throw ValidationError("empty function list");
  return out;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  for (const auto& item : split_list(spec)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ValidationError("not an integer: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

namespace {

struct Context {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_path;
  std::string config_path;
  json nodes = json::object();
  std::string failure;  // set when a verification fails after producing output
  std::ostream* log = nullptr;
};

// A subcommand: its CLI11 node, the getters that reproduce the resolved
// configuration, and the handler producing the result object.
struct Command {
  CLI::App* app = nullptr;
  std::vector<std::pair<std::string, std::function<json()>>> getters;
  std::function<json(Context&)> run;

  template <class T>
  void option(const std::string& name, T& ref, const std::string& desc) {
    app->add_option("--" + name, ref, desc);
    getters.emplace_back(name, [&ref] { return json(ref); });
  }
  void flag(const std::string& name, bool& ref, const std::string& desc) {
    app->add_flag("--" + name, ref, desc);
    getters.emplace_back(name, [&ref] { return json(ref); });
  }
  json resolved() const {
    json j = json::object();
    for (const auto& [name, get] : getters) j[name] = get();
    return j;
  }
};

// Storage for every flag. Only the selected subcommand's fields are read.
struct Values {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  std::string config;
  std::string csv;

  int n = 100;
  double beta = 2.0;
  double p = 2.0;
  double q = 2.0;
  double n1 = -1.0;
  double n2 = -1.0;
  double a = 0.25;
  double b = 0.5;
  std::string input;
  bool bisection = false;
  std::string func = "x";
  int N = 64;
  int theta_nodes = kDefaultThetaNodes;
  double x = 2.0;
  int K = 8;
  int cov_nodes = kDefaultCovarianceNodes;
  bool verify = false;
  double tol = 1e-8;
  std::string funcs = "gamma1..gamma4";
  int fluct_reps = 1000;
  int terms = 64;
  std::string regime = "proportional";
  std::string sizes = "128,256,512,1024";
  double offset1 = 3.0;
  double offset2 = 3.0;
  int lln_reps = 20;
  int k = 2;
  std::string alpha_text = "1/2";
  std::string a_text = "1/4";
  std::string b_text = "1/2";
  std::string grid = "128,256,512";
  int exact_n = 0;
  int ext_n = 5000;
  int ext_reps = 20000;
  std::string mode = "beta";
  bool weighted = false;
  int beta_nodes = kDefaultBetaNodes;
  double conc_n = 256.0;
  int conc_reps = 2000;
  bool quick = false;
  std::string only;
};

EnsembleParams make_params(const Values& v) {
  if (v.n1 > 0.0 || v.n2 > 0.0) {
    if (!(v.n1 > 0.0 && v.n2 > 0.0)) throw ValidationError("--n1 and --n2 must be given together");
    return EnsembleParams(v.n, v.beta, v.n1, v.n2);
  }
  return EnsembleParams::from_pq(v.n, v.beta, v.p, v.q);
}

// Support used to build shifted Chebyshev functions; [0, 1] when the
// parameters are extremal and no limiting support exists.
SupportInterval support_or_unit(const AsymptoticParams& asym) {
  if (asym.extremal) return SupportInterval{0.0, 1.0};
  return support_edges(asym);
}

json support_json(const SupportInterval& s) {
  return json{{"lambda_minus", s.lambda_minus}, {"lambda_plus", s.lambda_plus}};
}

json matrix_json(const std::vector<std::vector<double>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  return f;
}

// --- handlers -------------------------------------------------------------

json run_sample(const Values& v, Context& ctx) {
  const EnsembleParams params = make_params(v);
  const TridiagonalFactor f = sample_factor(params, ReplicateStreams(ctx.seed, 0));
  const SymTridiagonal a = assemble_gram(f);
  const Spectrum s = eigenvalues(a);
  if (!v.csv.empty()) {
    auto out = open_output(v.csv);
    write_factor_csv(out, f);
  }
  return json{{"n", params.n()},          {"n1", params.n1()},         {"n2", params.n2()},
              {"beta", params.beta()},    {"eigenvalues", s.values},   {"trace", a.trace()},
              {"gram_trace", gram_trace(f)}, {"used_bisection", s.used_bisection}};
}

json run_eig(const Values& v, Context& ctx) {
  SymTridiagonal a;
  if (!v.input.empty()) {
    std::ifstream in(v.input);
    if (!in) throw ValidationError("cannot read '" + v.input + "'");
    json j;
    try {
      in >> j;
      a.diag = j.at("diag").get<std::vector<double>>();
      a.off = j.value("off", std::vector<double>{});
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed matrix file: ") + e.what());
    }
  } else {
    a = assemble_gram(sample_factor(make_params(v), ReplicateStreams(ctx.seed, 0)));
  }
  json out{{"n", a.size()}, {"trace", a.trace()}, {"frobenius_sq", a.frobenius_sq()}};
  if (v.bisection) {
    out["eigenvalues"] = bisection_eigenvalues(a);
    out["solver"] = "bisection";
  } else {
    const Spectrum s = eigenvalues(a);
    out["eigenvalues"] = s.values;
    out["solver"] = s.used_bisection ? "ql+bisection" : "ql";
    out["residual_trace_error"] = s.residual_trace_error;
  }
  return out;
}

json run_spectrum(const Values& v, Context& ctx) {
  const AsymptoticParams asym = AsymptoticParams::from_ab(v.a, v.b, v.beta);
  const SupportInterval support = support_edges(asym);
  const TestFunction f = functions::by_name(v.func, support);
  const ChebyshevCoefficients cc = cheb_coeffs(f, v.N, support, v.theta_nodes);
  const VarianceFunctionals vf = variance_functionals(f, v.N, v.beta, support, v.theta_nodes);
  ctx.nodes["theta"] = v.theta_nodes;
  json out{{"function", f.tag},
           {"support", support_json(support)},
           {"p", asym.p},
           {"q", asym.q},
           {"fhat", cc.fhat},
           {"sigma_sq", vf.sigma_sq},
           {"tau_sq", vf.tau_sq},
           {"tail_estimate", vf.tail_estimate},
           {"non_decaying", vf.non_decaying},
           {"mu_integral", integrate_mu(f, asym, v.theta_nodes)},
           {"nu_integral", integrate_nu(f, support, v.theta_nodes)},
           {"outside_hypotheses", f.outside_hypotheses}};
  if (f.has_derivative()) out["tau_sq_direct"] = tau_sq_direct(f, support, v.theta_nodes);
  if (std::isfinite(v.x) && !support.contains(v.x) && v.x != 0.0 && v.x != 1.0) {
    const StieltjesPair sp = stieltjes_pair(v.x, asym);
    out["stieltjes"] = json{{"x", v.x}, {"m0", sp.m0}, {"m1", sp.m1}};
  }
  return out;
}

json run_cov(const Values& v, Context& ctx) {
  const AsymptoticParams asym = AsymptoticParams::from_ab(v.a, v.b, v.beta);
  const SupportInterval support = support_edges(asym);
  const CovarianceMatrix quad = covariance_matrix(v.K, asym, v.cov_nodes);
  const CovarianceMatrix theory = theory_covariance(v.K, v.beta, support);
  double worst = 0.0;
  for (int k = 1; k <= v.K; ++k)
    for (int l = 1; l <= v.K; ++l) worst = std::max(worst, std::abs(quad.at(k, l) - theory.at(k, l)));
  ctx.nodes["covariance_quadrature"] = quad.quadrature_nodes;
  json out{{"K", v.K},
           {"support", support_json(support)},
           {"quadrature", matrix_json(quad.entries)},
           {"theory", matrix_json(theory.entries)},
           {"max_abs_diff", worst},
           {"error_estimate", quad.error_estimate},
           {"conditioning", quad.conditioning},
           {"smallest_eigenvalue", quad.smallest_eigenvalue()}};
  if (v.verify) {
    const bool ok = worst <= v.tol;
    out["verified"] = ok;
    if (*ctx.log) *ctx.log << "max |C - alpha L Lambda L^T| = " << worst << " (tol " << v.tol << ")\n";
    if (!ok) ctx.failure = "covariance verification failed: max diff exceeds tolerance";
  }
  return out;
}

json run_fluct(const Values& v, Context& ctx) {
  ExperimentConfig c;
  c.params = make_params(v);
  const AsymptoticParams asym = derive_asymptotic(c.params);
  const SupportInterval support = support_or_unit(asym);
  for (const auto& name : expand_function_names(v.funcs)) c.functions.push_back(functions::by_name(name, support));
  c.replicates = v.fluct_reps;
  c.seed = ctx.seed;
  c.threads = ctx.threads;
  c.chebyshev_terms = v.terms;
  c.keep_samples = !v.csv.empty();
  const RunResult r = run_fluctuations(c);
  if (!v.csv.empty()) {
    auto out = open_output(v.csv);
    write_samples_csv(out, r);
  }
  ctx.nodes["theta"] = kDefaultThetaNodes;
  ctx.nodes["chebyshev_terms"] = v.terms;
  json per = json::array();
  for (std::size_t i = 0; i < r.tags.size(); ++i) {
    json f{{"tag", r.tags[i]},
           {"mean", r.means[i]},
           {"variance", r.variances[i]},
           {"variance_se", r.variance_se[i]},
           {"skewness", r.skewness[i]},
           {"excess_kurtosis", r.excess_kurtosis[i]},
           {"ks_distance", r.ks_distance[i]}};
    if (r.theory.available) {
      f["theory_variance"] = r.theory.variance[i];
      f["relative_error"] = (r.variances[i] - r.theory.variance[i]) / r.theory.variance[i];
    }
    per.push_back(f);
  }
  json out{{"n", c.params.n()},
           {"n1", c.params.n1()},
           {"n2", c.params.n2()},
           {"beta", c.params.beta()},
           {"replicates", r.replicates},
           {"threads_used", r.threads_used},
           {"used_power_traces", r.used_power_traces},
           {"centering", "empirical mean over replicates"},
           {"functions", per},
           {"covariance", matrix_json(r.covariance)},
           {"covariance_se", matrix_json(r.covariance_se)},
           {"theory_available", r.theory.available},
           {"theory_note", r.theory.note},
           {"run_seconds", r.wall_seconds}};
  if (r.theory.available) out["theory_covariance"] = matrix_json(r.theory.covariance);
  if (!asym.extremal) out["support"] = support_json(support);
  return out;
}

json run_lln(const Values& v, Context& ctx) {
  const LlnRegime regime = parse_regime(v.regime);
  LlnOptions o;
  o.beta = v.beta;
  o.p = v.p;
  o.q = v.q;
  o.offset1 = v.offset1;
  o.offset2 = v.offset2;
  o.replicates = v.lln_reps;
  o.seed = ctx.seed;
  o.threads = ctx.threads;
  SupportInterval support{0.0, 1.0};
  if (regime == LlnRegime::proportional) {
    const double s = v.p + v.q;
    support = support_or_unit(AsymptoticParams::from_ab(1.0 / s, v.p / s, v.beta));
  }
  const TestFunction f = functions::by_name(v.func, support);
  const LlnTable t = lln_check(regime, parse_int_list(v.sizes), f, o);
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back(json{{"n", r.n},
                        {"n1", r.n1},
                        {"n2", r.n2},
                        {"target", r.target},
                        {"mean_statistic", r.mean_statistic},
                        {"distance", r.distance}});
  json out{{"regime", to_string(regime)}, {"function", f.tag}, {"rows", rows},
           {"shrinks_monotonically", shrinks_monotonically(t, 1)}};
  if (regime == LlnRegime::superlinear) {
    out["point_mass"] = t.point_mass;
    out["point_mass_rule"] = "lim (n1 - n)/(n1 + n2 - 2n)";
  }
  if (regime == LlnRegime::sublinear) ctx.nodes["theta"] = kDefaultThetaNodes;
  return out;
}

json run_expect(const Values& v, Context& ctx) {
  const RationalParams params = RationalParams::parse(v.alpha_text, v.a_text, v.b_text);
  const DeviationReport d = deviation_check(v.k, params, parse_int_list(v.grid));
  ctx.nodes["theta"] = kDefaultThetaNodes;
  json out{{"k", d.k},
           {"n_grid", d.n_grid},
           {"eta0", d.eta0},
           {"eta0_exact", d.eta0_exact},
           {"mu_moment", d.mu_moment},
           {"deviation", d.deviation},
           {"deviation_exact", d.deviation_exact},
           {"predicted", d.predicted},
           {"residual", d.residual}};
  if (v.exact_n > 0) {
    out["exact_trace"] = json{{"n", v.exact_n},
                              {"value", to_string(expected_trace_exact(params, v.exact_n, v.k))}};
  }
  return out;
}

json run_extremal(const Values& v, Context& ctx) {
  const ExtremalMoments m = extremal_moments(v.ext_n, v.beta, v.ext_reps, ctx.seed, ctx.threads);
  return json{{"n", v.ext_n},
              {"beta", v.beta},
              {"replicates", m.replicates},
              {"second", m.second},
              {"second_se", m.second_se},
              {"fourth", m.fourth},
              {"fourth_se", m.fourth_se},
              {"predicted_second", m.predicted_second},
              {"predicted_fourth", m.predicted_fourth},
              {"kurtosis_ratio", m.fourth / (m.second * m.second)}};
}

json report_json(const PoincareReport& r) {
  return json{{"variance", r.variance},       {"bound", r.bound},       {"ratio", r.ratio},
              {"variance_se", r.variance_se}, {"bound_se", r.bound_se}, {"replicates", r.replicates},
              {"margin_in_se", std::isfinite(r.margin_in_se()) ? json(r.margin_in_se()) : json(nullptr)}};
}

json run_concentration(const Values& v, Context& ctx) {
  if (v.mode == "beta") {
    const TestFunction f = functions::by_name(v.func, SupportInterval{0.0, 1.0});
    ctx.nodes["beta_gauss"] = v.beta_nodes;
    json out = report_json(beta_poincare_ratio(v.p, v.q, f, v.weighted, v.beta_nodes));
    out["mode"] = "beta";
    return out;
  }
  if (v.mode == "jacobi") {
    if (v.conc_n != std::floor(v.conc_n) || v.conc_n < 1.0) throw ValidationError("--n must be a positive integer");
    const EnsembleParams params = EnsembleParams::from_pq(static_cast<int>(v.conc_n), v.beta, v.p, v.q);
    const TestFunction f = functions::by_name(v.func, support_or_unit(derive_asymptotic(params)));
    json out = report_json(jacobi_poincare_check(params, f, v.conc_reps, ctx.seed, ctx.threads));
    out["mode"] = "jacobi";
    out["prefactor"] = jacobi_poincare_prefactor(params);
    return out;
  }
  if (v.mode == "coupling") {
    ctx.nodes["hermite"] = v.beta_nodes;
    const double g = coupling_gap(v.conc_n, v.p, v.q, v.beta_nodes);
    return json{{"mode", "coupling"},
                {"gap", g},
                {"n2_gap", v.conc_n * v.conc_n * g},
                {"independent_gap", independent_coupling_gap(v.conc_n, v.p, v.q)}};
  }
  throw ValidationError("unknown --mode '" + v.mode + "' (beta, jacobi, coupling)");
}

json run_verify_all(const Values& v, Context& ctx) {
  AcceptanceOptions o;
  o.quick = v.quick;
  o.threads = ctx.threads;
  o.seed = ctx.seed;
  if (!v.only.empty()) o.only = parse_int_list(v.only);
  json rows = json::array();
  int failed = 0;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), id) == o.only.end()) continue;
    const CriterionResult r = run_criterion(id, o);
    *ctx.log << format_line(r) << '\n' << std::flush;
    if (!r.passed && !r.skipped) ++failed;
    rows.push_back(json{{"id", r.id},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"skipped", r.skipped},
                        {"detail", r.detail},
                        {"seconds", r.seconds}});
  }
  if (failed > 0) ctx.failure = std::to_string(failed) + " acceptance criteria failed";
  return json{{"criteria", rows}, {"failed", failed}};
}

// --- config handling ------------------------------------------------------

// Tokens "--key value" for every entry of a flat JSON object.
std::vector<std::string> config_tokens(const json& flat) {
  std::vector<std::string> out;
  for (const auto& [key, value] : flat.items()) {
    if (key == "config" || key == "out") continue;
    const std::string opt = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(opt);
    } else if (value.is_null()) {
      continue;
    } else if (value.is_string()) {
      out.push_back(opt);
      out.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      out.push_back(opt);
      out.push_back(value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) {
        if (!joined.empty()) joined += ',';
        joined += e.is_string() ? e.get<std::string>() : e.dump();
      }
      out.push_back(opt);
      out.push_back(joined);
    } else {
      throw ValidationError("config key '" + key + "' has an unsupported value");
    }
  }
  return out;
}

// Config files are either a flat object of flag values or a previous
// output artifact, whose "config" member is used.
json load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config '" + path + "' must be a JSON object");
  if (j.contains("schema") && j.contains("config")) {
    if (j.value("command", command) != command)
      throw ValidationError("config artifact belongs to '" + j.value("command", "") + "'");
    j = j["config"];
    if (!j.is_object()) throw ValidationError("artifact config must be an object");
  }
  return j;
}

json error_record(const std::string& kind, const std::string& message, const std::string& command) {
  return json{{"schema", 1},
              {"version", kVersion},
              {"command", command},
              {"error", json{{"kind", kind}, {"message", message}}}};
}

}  // namespace

int dispatch(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  std::string command;
  Values v;
  if (const char* env = std::getenv("JACOBI_THREADS")) {
    try {
      v.threads = std::stoi(env);
    } catch (const std::exception&) {
      err << error_record("validation", "JACOBI_THREADS is not an integer", "").dump() << '\n';
      return kExitValidation;
    }
  }
  try {
    CLI::App app{"Simulate beta-Jacobi ensembles and check their limit theorems", "betajac"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

    std::map<std::string, Command> commands;
    auto make = [&](const std::string& name, const std::string& desc) -> Command& {
      Command& c = commands[name];
      c.app = app.add_subcommand(name, desc);
      c.option("seed", v.seed, "64-bit seed");
      c.option("threads", v.threads, "thread hint (default from JACOBI_THREADS, 0 = all cores)");
      c.app->add_option("--out", v.out, "write the JSON result here instead of stdout");
      c.app->add_option("--config", v.config, "JSON file of flag values or a previous output");
      return c;
    };
    auto ensemble = [&](Command& c) {
      c.option("n", v.n, "matrix size");
      c.option("beta", v.beta, "inverse temperature");
      c.option("p", v.p, "n1 / n");
      c.option("q", v.q, "n2 / n");
      c.option("n1", v.n1, "first degree of freedom (overrides p)");
      c.option("n2", v.n2, "second degree of freedom (overrides q)");
    };
    auto triangle = [&](Command& c) {
      c.option("a", v.a, "1/(p+q)");
      c.option("b", v.b, "p/(p+q)");
      c.option("beta", v.beta, "inverse temperature");
    };

    {
      Command& c = make("sample", "draw one ensemble and print its eigenvalues");
      ensemble(c);
      c.app->add_option("--csv", v.csv, "also write the bidiagonal factor as CSV");
      c.run = [&](Context& ctx) { return run_sample(v, ctx); };
    }
    {
      Command& c = make("eig", "eigenvalues of a tridiagonal from --input or a fresh draw");
      ensemble(c);
      c.option("input", v.input, "JSON file with diag and off arrays");
      c.flag("bisection", v.bisection, "use Sturm bisection instead of QL");
      c.run = [&](Context& ctx) { return run_eig(v, ctx); };
    }
    {
      Command& c = make("spectrum", "Chebyshev coefficients, variance functionals and measures");
      triangle(c);
      c.option("func", v.func, "test function (x, x<k>, gamma<n>, exp, sin, pwl, const)");
      c.option("N", v.N, "Chebyshev truncation");
      c.option("nodes", v.theta_nodes, "theta quadrature nodes");
      c.option("x", v.x, "point outside the support for the Stieltjes pair");
      c.run = [&](Context& ctx) { return run_spectrum(v, ctx); };
    }
    {
      Command& c = make("cov", "limiting covariance of monomial traces");
      triangle(c);
      c.option("K", v.K, "largest monomial degree");
      c.option("nodes", v.cov_nodes, "Gauss-Legendre nodes");
      c.flag("verify", v.verify, "fail unless quadrature matches alpha L Lambda L^T");
      c.option("tol", v.tol, "verification tolerance");
      c.run = [&](Context& ctx) { return run_cov(v, ctx); };
    }
    {
      Command& c = make("fluct", "Monte Carlo fluctuations of linear statistics");
      ensemble(c);
      c.option("funcs", v.funcs, "functions, e.g. gamma1..gamma4,x");
      c.option("reps", v.fluct_reps, "replicates");
      c.option("terms", v.terms, "Chebyshev terms for the theory columns");
      c.app->add_option("--csv", v.csv, "write centered samples as CSV");
      c.run = [&](Context& ctx) { return run_fluct(v, ctx); };
    }
    {
      Command& c = make("lln", "law of large numbers in one growth regime");
      c.option("regime", v.regime, "sublinear, proportional or superlinear");
      c.option("sizes", v.sizes, "matrix sizes");
      c.option("func", v.func, "test function");
      c.option("beta", v.beta, "inverse temperature");
      c.option("p", v.p, "proportional or superlinear weight of n1");
      c.option("q", v.q, "proportional or superlinear weight of n2");
      c.option("offset1", v.offset1, "sublinear n1 - n");
      c.option("offset2", v.offset2, "sublinear n2 - n");
      c.option("reps", v.lln_reps, "replicates per size");
      c.run = [&](Context& ctx) { return run_lln(v, ctx); };
    }
    {
      Command& c = make("expect", "exact expected traces and the 1/n mean deviation");
      c.option("k", v.k, "moment order (1..3)");
      c.option("alpha", v.alpha_text, "2/beta as a rational");
      c.option("a", v.a_text, "1/(p+q) as a rational");
      c.option("b", v.b_text, "p/(p+q) as a rational");
      c.option("grid", v.grid, "increasing matrix sizes for extrapolation");
      c.option("exact-n", v.exact_n, "also print E tr A^k exactly at this size");
      c.run = [&](Context& ctx) { return run_expect(v, ctx); };
    }
    {
      Command& c = make("extremal", "central moments of tr A at p = q = 1");
      c.option("n", v.ext_n, "matrix size");
      c.option("beta", v.beta, "inverse temperature");
      c.option("reps", v.ext_reps, "replicates");
      c.run = [&](Context& ctx) { return run_extremal(v, ctx); };
    }
    {
      Command& c = make("concentration", "Poincare inequalities and the root-Beta coupling");
      c.option("mode", v.mode, "beta, jacobi or coupling");
      c.option("p", v.p, "first shape or n1 / n");
      c.option("q", v.q, "second shape or n2 / n");
      c.option("func", v.func, "test function");
      c.flag("weighted", v.weighted, "weighted form on [-1, 1] (beta mode)");
      c.option("nodes", v.beta_nodes, "Gauss nodes (beta and coupling modes)");
      c.option("n", v.conc_n, "matrix size (jacobi) or scale (coupling)");
      c.option("beta", v.beta, "inverse temperature (jacobi mode)");
      c.option("reps", v.conc_reps, "replicates (jacobi mode)");
      c.run = [&](Context& ctx) { return run_concentration(v, ctx); };
    }
    {
      Command& c = make("verify-all", "run every acceptance criterion");
      c.flag("quick", v.quick, "skip the two large Monte Carlo criteria");
      c.option("only", v.only, "comma-separated criterion ids");
      c.run = [&](Context& ctx) { return run_verify_all(v, ctx); };
    }

    // Locate the subcommand and splice config-file values in front of the
    // command-line flags so the latter win.
    std::vector<std::string> args = args_in;
    std::size_t sub_pos = 0;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (commands.count(args[i])) {
        sub_pos = i;
        command = args[i];
        break;
      }
    }
    if (sub_pos != 0) {
      std::string config_path;
      for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
      }
      if (!config_path.empty()) {
        const auto tokens = config_tokens(load_config(config_path, command));
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, tokens.begin(), tokens.end());
      }
    }
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      err << error_record("usage", e.what(), command).dump() << '\n';
      return kExitValidation;
    }

    const Command& cmd = commands.at(command);
    Context ctx;
    ctx.seed = v.seed;
    ctx.threads = v.threads;
    ctx.out_path = v.out;
    ctx.config_path = v.config;
    ctx.log = &err;
    err << "betajac " << command << ": start\n";
    const auto start = std::chrono::steady_clock::now();
    json result = cmd.run(ctx);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json config = cmd.resolved();
    config.erase("threads");
    json envelope{{"schema", 1},
                  {"command", command},
                  {"version", kVersion},
                  {"config", config},
                  {"seed", ctx.seed},
                  {"threads", ctx.threads},
                  {"wall_seconds", secs},
                  {"nodes", ctx.nodes},
                  {"result", result}};
    if (!ctx.failure.empty()) envelope["failure"] = ctx.failure;
    if (ctx.out_path.empty()) {
      out << envelope.dump(2) << '\n';
    } else {
      auto f = open_output(ctx.out_path);
      f << envelope.dump(2) << '\n';
    }
    err << "betajac " << command << ": done in " << secs << " s\n";
    if (!ctx.failure.empty()) {
      err << error_record("numerical", ctx.failure, command).dump() << '\n';
      return kExitNumerical;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << error_record("validation", e.what(), command).dump() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << error_record("numerical", e.what(), command).dump() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << error_record("numerical", e.what(), command).dump() << '\n';
    return kExitNumerical;
  }
}

}  // namespace betajac::cli
