#ifndef HAMEXP_CLI_HPP
#define HAMEXP_CLI_HPP

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hamexp/catalog.hpp"
#include "hamexp/expansion.hpp"
#include "hamexp/mc.hpp"
#include "hamexp/pipeline.hpp"
#include "hamexp/polynomial.hpp"

namespace hamexp::cli {

using nlohmann::json;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ValidationError("config: missing or non-numeric key '" + key + "'");
  return j[key].get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ValidationError("config: key '" + key + "' must be a number");
  return j[key].get<double>();
}

inline std::string string_or(const json& j, const std::string& key,
                             const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw ValidationError("config: key '" + key + "' must be a string");
  return j[key].get<std::string>();
}

inline SteinSteinParams stein_stein_from_json(const json& j) {
  SteinSteinParams p;
  p.a = number_or(j, "a", 0.0);
  p.b = number_or(j, "b", 0.0);
  p.c = require_number(j, "c");
  p.sigma0 = number_or(j, "sigma0", 0.0);
  p.rho = number_or(j, "rho", 0.0);
  p.T = number_or(j, "T", 1.0);
  validate(p);
  return p;
}

inline PolyComponent poly_component_from_json(const json& j, int dim) {
  if (!j.is_array()) throw ValidationError("polynomial component must be an array of terms");
  PolyComponent comp;
  for (const json& term : j) {
    if (!term.contains("exponents") || !term["exponents"].is_array() ||
        !term.contains("coeff"))
      throw ValidationError("polynomial term needs 'exponents' array and 'coeff'");
    PolyTerm t;
    for (const json& e : term["exponents"]) t.exponents.push_back(e.get<int>());
    t.coeff = term["coeff"].get<double>();
    comp.push_back(std::move(t));
  }
  validate_poly_component(comp, dim);
  return comp;
}

inline Vec vec_from_json(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ValidationError("config: missing array key '" + key + "'");
  Vec v(static_cast<int>(j[key].size()));
  int i = 0;
  for (const json& e : j[key]) v[i++] = e.get<double>();
  return v;
}

inline ModelSpec polynomial_model_from_json(const json& j) {
  const int d = static_cast<int>(require_number(j, "dim_state"));
  const int m = static_cast<int>(require_number(j, "dim_noise"));
  const int l = static_cast<int>(require_number(j, "dim_proj"));

  auto field_from = [&](const std::string& key, int n_components) {
    if (!j.contains(key) || !j[key].is_array() ||
        static_cast<int>(j[key].size()) != n_components)
      throw ValidationError("config: '" + key + "' must be an array of " +
                            std::to_string(n_components) + " polynomial components");
    std::vector<PolyComponent> comps;
    for (const json& c : j[key]) comps.push_back(poly_component_from_json(c, d));
    return make_poly_vector_field(std::move(comps), d);
  };

  ModelSpec spec;
  spec.dim_state = d;
  spec.dim_noise = m;
  spec.dim_proj = l;
  PolyVectorField drift = field_from("drift", d);
  spec.drift = drift;
  spec.drift_jac = [drift](const Vec& x) { return drift.jacobian(x); };
  if (j.contains("drift_eps")) {
    PolyVectorField de = field_from("drift_eps", d);
    spec.drift_eps = de;
    spec.drift_eps_jac = [de](const Vec& x) { return de.jacobian(x); };
  }

  // diffusion: array of m columns, each an array of d polynomial components
  if (!j.contains("diffusion") || !j["diffusion"].is_array() ||
      static_cast<int>(j["diffusion"].size()) != m)
    throw ValidationError("config: 'diffusion' must be an array of m columns");
  std::vector<PolyVectorField> columns;
  for (const json& col : j["diffusion"]) {
    if (!col.is_array() || static_cast<int>(col.size()) != d)
      throw ValidationError("config: each diffusion column needs d components");
    std::vector<PolyComponent> comps;
    for (const json& c : col) comps.push_back(poly_component_from_json(c, d));
    columns.push_back(make_poly_vector_field(std::move(comps), d));
  }
  spec.diffusion = [columns, d, m](const Vec& x) {
    Mat s(d, m);
    for (int i = 0; i < m; ++i) s.col(i) = columns[static_cast<std::size_t>(i)](x);
    return s;
  };
  spec.diffusion_col_jac = [columns](const Vec& x, int i) {
    return columns[static_cast<std::size_t>(i)].jacobian(x);
  };

  if (j.contains("correlation")) {
    const json& c = j["correlation"];
    if (!c.is_array() || static_cast<int>(c.size()) != m)
      throw ValidationError("config: 'correlation' must be an m x m array");
    spec.correlation.resize(m, m);
    for (int r = 0; r < m; ++r) {
      if (!c[static_cast<std::size_t>(r)].is_array() ||
          static_cast<int>(c[static_cast<std::size_t>(r)].size()) != m)
        throw ValidationError("config: 'correlation' must be an m x m array");
      for (int q = 0; q < m; ++q)
        spec.correlation(r, q) = c[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)].get<double>();
    }
  } else {
    spec.correlation = Mat::Identity(m, m);
  }
  spec.x0 = vec_from_json(j, "x0");
  if (j.contains("x0_hat")) spec.x0_hat = vec_from_json(j, "x0_hat");
  return make_model(std::move(spec));
}

struct ParsedModel {
  ModelSpec spec;
  std::string name;
  std::optional<SteinSteinParams> stein_stein;
  std::optional<std::pair<double, double>> black_scholes;  // (sigma, y0)
};

inline ParsedModel model_from_json(const json& cfg, double maturity) {
  if (!cfg.contains("model") || !cfg["model"].is_object())
    throw ValidationError("config: missing 'model' object");
  const json& m = cfg["model"];
  const std::string name = string_or(m, "name", "");
  ParsedModel parsed;
  parsed.name = name;
  if (name == "stein_stein") {
    SteinSteinParams p = stein_stein_from_json(m);
    p.T = maturity;
    parsed.stein_stein = p;
    parsed.spec = stein_stein_model(p);
  } else if (name == "black_scholes") {
    const double sigma = require_number(m, "sigma");
    const double y0 = number_or(m, "y0", 0.0);
    parsed.black_scholes = {sigma, y0};
    parsed.spec = black_scholes_model(sigma, y0);
  } else if (name == "polynomial") {
    parsed.spec = polynomial_model_from_json(m);
  } else {
    throw ValidationError(
        "config: model.name must be one of stein_stein, black_scholes, polynomial");
  }
  return parsed;
}

inline json expansion_to_json(const ExpansionResult& r) {
  json j;
  j["c1"] = r.c1;
  j["c2"] = r.c2;
  j["lambda_prime"] = std::vector<double>(r.lambda_prime.data(),
                                          r.lambda_prime.data() + r.lambda_prime.size());
  json y_hats = json::array();
  for (const Vec& y : r.y_hats)
    y_hats.push_back(std::vector<double>(y.data(), y.data() + y.size()));
  j["y_hats"] = y_hats;
  if (r.theta)
    j["theta"] = *r.theta;
  else
    j["theta"] = nullptr;
  j["algebraic_exponent"] = r.algebraic_exponent;
  j["c0"] = "unknown";
  json d;
  d["minimizer_count"] = r.diagnostics.minimizer_count;
  d["locally_elliptic"] = r.diagnostics.locally_elliptic;
  d["nonfocal"] = r.diagnostics.nonfocal;
  d["focality_determinants"] = r.diagnostics.focality_determinants;
  d["hypotheses_unverified"] = r.diagnostics.hypotheses_unverified;
  d["c2_tie"] = r.diagnostics.c2_tie;
  j["diagnostics"] = d;
  return j;
}

inline json pipeline_to_json(const PipelineResult& r) {
  json j = expansion_to_json(r.expansion);
  json sols = json::array();
  for (const BvpSolution& s : r.solutions) {
    json e;
    e["p0"] = std::vector<double>(s.p0.data(), s.p0.data() + s.p0.size());
    e["energy"] = s.energy;
    e["residual_norm"] = s.residual_norm;
    e["newton_iterations"] = s.newton_iterations;
    sols.push_back(e);
  }
  j["solutions"] = sols;
  j["search"] = {{"starts", r.enumeration.starts},
                 {"converged", r.enumeration.converged},
                 {"failed", r.enumeration.failed},
                 {"box_half_width", r.enumeration.box_half_width}};
  return j;
}

inline void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output path " + path);
  f << j.dump(2) << "\n";
}

inline void emit_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output path " + path);
  f << text;
}

inline int thread_count(const json& cfg, int flag_value) {
  if (flag_value > 0) return flag_value;
  if (cfg.contains("threads")) return static_cast<int>(require_number(cfg, "threads"));
  if (const char* env = std::getenv("HAMEXPAND_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

inline PipelineOptions pipeline_options_from_json(const json& cfg) {
  PipelineOptions opts;
  if (!cfg.contains("solver")) return opts;
  const json& s = cfg["solver"];
  opts.enumeration.shoot.tol = number_or(s, "bvp_tol", opts.enumeration.shoot.tol);
  opts.enumeration.box_half_width = number_or(s, "box_half_width", 0.0);
  opts.enumeration.points_per_orthant =
      static_cast<int>(number_or(s, "points_per_orthant", opts.enumeration.points_per_orthant));
  opts.enumeration.shoot.integrator.rel_tol =
      number_or(s, "rel_tol", opts.enumeration.shoot.integrator.rel_tol);
  opts.enumeration.shoot.integrator.abs_tol =
      number_or(s, "abs_tol", opts.enumeration.shoot.integrator.abs_tol);
  opts.minimal_rel_tol = number_or(s, "minimal_rel_tol", opts.minimal_rel_tol);
  return opts;
}

}  // namespace detail

struct GlobalFlags {
  std::string config_path;
  std::string output_path;
  int threads = 0;
  json overrides = json::object();
};

inline json load_config(const GlobalFlags& flags) {
  json cfg = json::object();
  if (!flags.config_path.empty()) {
    std::ifstream f(flags.config_path);
    if (!f) throw ValidationError("cannot open config file " + flags.config_path);
    try {
      cfg = json::parse(f);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config parse error: ") + e.what());
    }
  }
  for (auto& [key, value] : flags.overrides.items()) cfg[key] = value;
  return cfg;
}

inline int cmd_steinstein(const json& cfg, const std::string& out_path) {
  SteinSteinParams p = detail::stein_stein_from_json(cfg);
  const double target = detail::number_or(cfg, "target", 1.0);
  SteinSteinSolution sol = solve_correlated(p, target);
  json j;
  j["command"] = "steinstein";
  j["params"] = {{"a", p.a},       {"b", p.b},     {"c", p.c},
                 {"sigma0", p.sigma0}, {"rho", p.rho}, {"T", p.T}};
  j["target"] = target;
  j["c1"] = sol.c1;
  j["c2"] = sol.c2;
  j["r1"] = sol.r1;
  j["p_plus"] = sol.p_plus;
  j["chi"] = sol.chi;
  j["q0_plus"] = sol.q0_plus;
  json branches = json::array();
  for (const BranchRoot& br : sol.branch_roots)
    branches.push_back({{"r", br.r}, {"p_plus", br.p_plus}});
  j["branch_roots"] = branches;
  j["theta"] = 2;
  j["algebraic_exponent"] = -0.5;
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_blackscholes(const json& cfg, const std::string& out_path) {
  const double sigma = detail::require_number(cfg, "sigma");
  const double T = detail::number_or(cfg, "T", 1.0);
  const double y0 = detail::number_or(cfg, "y0", 0.0);
  BlackScholesConstants k = black_scholes_constants(sigma, T, y0);
  json j;
  j["command"] = "blackscholes";
  j["params"] = {{"sigma", sigma}, {"T", T}, {"y0", y0}};
  j["c1"] = k.c1;
  j["c2"] = k.c2;
  j["theta"] = k.theta;
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_expand(const json& cfg, const std::string& out_path) {
  const double T = detail::number_or(cfg, "T", 1.0);
  detail::ParsedModel model = detail::model_from_json(cfg, T);
  Vec target;
  if (cfg.contains("target") && cfg["target"].is_array())
    target = detail::vec_from_json(cfg, "target");
  else {
    target = Vec(1);
    target[0] = detail::number_or(cfg, "target", 1.0);
  }
  if (static_cast<int>(target.size()) != model.spec.dim_proj)
    throw ValidationError("config: target dimension must equal dim_proj");
  BvpProblem prob{model.spec, target, T, model.spec.x0};
  PipelineResult res = run_small_noise(prob, detail::pipeline_options_from_json(cfg));
  json j = detail::pipeline_to_json(res);
  j["command"] = "expand";
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_tail(const json& cfg, const std::string& out_path) {
  const double T = detail::number_or(cfg, "T", 1.0);
  const int theta = static_cast<int>(detail::require_number(cfg, "theta"));
  detail::ParsedModel model = detail::model_from_json(cfg, T);
  PipelineResult res = run_tail(model.spec, T, theta, detail::pipeline_options_from_json(cfg));
  json j = detail::pipeline_to_json(res);
  j["command"] = "tail";

  if (cfg.contains("curve")) {
    const json& c = cfg["curve"];
    const std::string path = detail::string_or(c, "path", "tail_curve.csv");
    const double y_min = detail::number_or(c, "y_min", 1.0);
    const double y_max = detail::number_or(c, "y_max", 10.0);
    const int n = static_cast<int>(detail::number_or(c, "n_points", 101));
    std::string csv = "y,log_f_leading\n";
    char buf[80];
    const double c1 = res.expansion.c1, c2 = res.expansion.c2;
    const double expo = res.expansion.algebraic_exponent;
    for (int i = 0; i < n; ++i) {
      const double y = y_min + (y_max - y_min) * i / std::max(1, n - 1);
      const double lf = -c1 * std::pow(y, 2.0 / theta) + c2 * std::pow(y, 1.0 / theta) +
                        expo * std::log(y);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", y, lf);
      csv += buf;
    }
    detail::emit_text(csv, path);
    j["curve_path"] = path;
  }
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_shorttime(const json& cfg, const std::string& out_path) {
  detail::ParsedModel model = detail::model_from_json(cfg, detail::number_or(cfg, "T", 1.0));
  Vec target;
  if (cfg.contains("target") && cfg["target"].is_array())
    target = detail::vec_from_json(cfg, "target");
  else {
    target = Vec(1);
    target[0] = detail::require_number(cfg, "target");
  }
  ShortTimeResult res =
      short_time_expansion(model.spec, target, detail::pipeline_options_from_json(cfg));
  json j = detail::pipeline_to_json(res.pipeline);
  j["command"] = "shorttime";
  j["distance_sq"] = res.distance_sq;
  j["algebraic_exponent"] = res.algebraic_exponent;
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_mc(const json& cfg, const std::string& out_path, int threads_flag) {
  const double T = detail::number_or(cfg, "T", 1.0);
  McConfig mc;
  mc.n_paths = static_cast<long>(detail::number_or(cfg, "n_paths", 100000));
  mc.n_steps = static_cast<int>(detail::number_or(cfg, "n_steps", 100));
  mc.seed = static_cast<std::uint64_t>(detail::number_or(cfg, "seed", 1));
  mc.antithetic = cfg.contains("antithetic") && cfg["antithetic"].get<bool>();
  mc.n_threads = detail::thread_count(cfg, threads_flag);

  detail::ParsedModel model = detail::model_from_json(cfg, T);
  std::vector<double> samples;
  if (model.stein_stein)
    samples = simulate_stein_stein(*model.stein_stein, mc);
  else if (model.black_scholes)
    samples = simulate_black_scholes(model.black_scholes->first, model.black_scholes->second,
                                     T, mc);
  else
    samples = simulate_terminal(model.spec, T, mc);

  json j;
  j["command"] = "mc";
  j["n_paths"] = mc.n_paths;
  j["n_steps"] = mc.n_steps;
  j["seed"] = mc.seed;
  const std::string samples_path = detail::string_or(cfg, "samples_path", "");
  if (!samples_path.empty()) {
    write_samples_binary(samples_path, samples);
    j["samples_path"] = samples_path;
  }
  const std::string csv_path = detail::string_or(cfg, "csv_path", "");
  if (!csv_path.empty()) {
    write_samples_csv(csv_path, samples);
    j["csv_path"] = csv_path;
  }
  if (cfg.contains("theta")) {
    const int theta = static_cast<int>(detail::require_number(cfg, "theta"));
    double q_lo = 0.995, q_hi = 0.99995;
    if (cfg.contains("quantile_range")) {
      q_lo = cfg["quantile_range"][0].get<double>();
      q_hi = cfg["quantile_range"][1].get<double>();
    }
    TailSlope slope = tail_slope(samples, theta, q_lo, q_hi);
    j["tail_slope"] = {{"slope", slope.slope},
                       {"std_error", slope.std_error},
                       {"n_tail_points", slope.n_tail_points},
                       {"threshold", slope.threshold}};
  }
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_smile(const json& cfg, const std::string& out_path) {
  double b1, b2;
  json j;
  j["command"] = "smile";
  if (cfg.contains("b1")) {
    b1 = detail::require_number(cfg, "b1");
    b2 = detail::number_or(cfg, "b2", 0.0);
  } else {
    SteinSteinParams p = detail::stein_stein_from_json(cfg);
    SteinSteinSolution sol = solve_correlated(p, 1.0);
    b1 = sol.c1 + 1.0;
    b2 = sol.c2;
    j["c1"] = sol.c1;
    j["c2"] = sol.c2;
  }
  const auto [beta1, beta2] = implied_vol_wing(b1, b2);
  j["b1"] = b1;
  j["b2"] = b2;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  if (cfg.contains("curve")) {
    const json& c = cfg["curve"];
    const std::string path = detail::string_or(c, "path", "wing_curve.csv");
    const double k_min = detail::number_or(c, "k_min", 0.5);
    const double k_max = detail::number_or(c, "k_max", 10.0);
    const int n = static_cast<int>(detail::number_or(c, "n_points", 101));
    std::string csv = "k,sigma_bs_sq_T_leading\n";
    char buf[80];
    for (int i = 0; i < n; ++i) {
      const double k = k_min + (k_max - k_min) * i / std::max(1, n - 1);
      const double v = beta1 * std::sqrt(k) + beta2;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", k, v * v);
      csv += buf;
    }
    detail::emit_text(csv, path);
    j["curve_path"] = path;
  }
  detail::emit(j, out_path);
  return 0;
}

inline int cmd_sweep(const json& cfg, const std::string& out_path) {
  auto grid_of = [&](const std::string& key, std::vector<double> fallback) {
    if (!cfg.contains("grid") || !cfg["grid"].contains(key)) return fallback;
    std::vector<double> v;
    for (const json& e : cfg["grid"][key]) v.push_back(e.get<double>());
    return v;
  };
  const std::vector<double> bs = grid_of("b", {0.0, -1.0});
  const std::vector<double> cs = grid_of("c", {0.5, 2.0});
  const std::vector<double> rhos = grid_of("rho", {0.0, -0.7});
  const std::vector<double> ts = grid_of("T", {0.5, 1.0});
  const double sigma0 = detail::number_or(cfg, "sigma0", 0.0);
  const double a = detail::number_or(cfg, "a", 0.0);
  const double target = detail::number_or(cfg, "target", 1.0);
  PipelineOptions opts = detail::pipeline_options_from_json(cfg);

  std::vector<SweepCell> cells;
  for (double b : bs)
    for (double c : cs)
      for (double rho : rhos)
        for (double T : ts) {
          SweepCell cell;
          cell.parameters = {{"b", b}, {"c", c}, {"rho", rho}, {"T", T}};
          try {
            SteinSteinParams p{a, b, c, sigma0, rho, T};
            ModelSpec model = stein_stein_model(p);
            BvpProblem prob{model, target * Vec::Ones(1), T, model.x0};
            PipelineResult res = run_small_noise(prob, opts);
            cell.report = res.focality.front();
          } catch (const std::exception& e) {
            cell.error = e.what();
          }
          cells.push_back(std::move(cell));
        }
  detail::emit_text(sweep_to_csv(cells), out_path.empty() ? "-" : out_path);
  return 0;
}

/// Entry point: parses flags, loads/validates the config, dispatches, and
/// maps exceptions to the documented exit codes (2 validation, 3
/// numerical failure).
inline int run(int argc, char** argv) {
  CLI::App app{"hamexpand: expansion constants for projected diffusions"};
  app.require_subcommand(1);

  GlobalFlags flags;
  std::map<std::string, double> scalar_overrides;
  const std::vector<std::string> commands = {"expand",       "tail", "shorttime",
                                             "steinstein",   "blackscholes",
                                             "mc",           "smile", "sweep"};
  std::vector<CLI::App*> subs;
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--output", flags.output_path, "output path (default stdout)");
    sub->add_option("--threads", flags.threads, "worker thread cap");
    // scalar overrides shared by the catalog commands
    for (const char* key : {"a", "b", "c", "sigma0", "rho", "T", "sigma", "y0", "target",
                            "theta", "n_paths", "n_steps", "seed", "b1", "b2"}) {
      sub->add_option_function<double>(
          std::string("--") + key,
          [&scalar_overrides, key](double v) { scalar_overrides[key] = v; });
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [key, value] : scalar_overrides) flags.overrides[key] = value;
    json cfg = load_config(flags);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "steinstein") return cmd_steinstein(cfg, flags.output_path);
    if (cmd == "blackscholes") return cmd_blackscholes(cfg, flags.output_path);
    if (cmd == "expand") return cmd_expand(cfg, flags.output_path);
    if (cmd == "tail") return cmd_tail(cfg, flags.output_path);
    if (cmd == "shorttime") return cmd_shorttime(cfg, flags.output_path);
    if (cmd == "mc") return cmd_mc(cfg, flags.output_path, flags.threads);
    if (cmd == "smile") return cmd_smile(cfg, flags.output_path);
    if (cmd == "sweep") return cmd_sweep(cfg, flags.output_path);
    throw ValidationError("unknown command " + cmd);
  } catch (const json::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {  // includes ValidationError
    std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 2;
  } catch (const IntegrationFailure& e) {
    std::cerr << json{{"error", e.what()},
                      {"kind", "numerical"},
                      {"last_valid_time", e.last_valid_time()}}
                     .dump()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "numerical"}}.dump() << "\n";
    return 3;
  }
}

}  // namespace hamexp::cli

#endif  // HAMEXP_CLI_HPP
