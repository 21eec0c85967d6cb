#include "fedmm/harness.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "fedmm/analysis.hpp"
#include "fedmm/genbounds.hpp"
#include "json.hpp"

namespace fedmm {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T read_number(const json& obj, const std::string& where, const std::string& key) {
  const json& v = obj.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw ConfigError("'" + where + "." + key + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && v.get<long long>() < 0)
        throw ConfigError("'" + where + "." + key + "' must be non-negative");
    }
  } else {
    if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  }
  return v.get<T>();
}

template <typename T>
void maybe(const json& obj, const std::string& where, const std::string& key, T& out) {
  if (obj.contains(key)) out = read_number<T>(obj, where, key);
}

template <typename T>
void maybe(const json& obj, const std::string& where, const std::string& key,
           std::optional<T>& out) {
  if (obj.contains(key)) out = read_number<T>(obj, where, key);
}

bool read_bool(const json& obj, const std::string& where, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError("'" + where + "." + key + "' must be a boolean");
  return obj.at(key).get<bool>();
}

std::string read_string(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.at(key).is_string()) throw ConfigError("'" + where + "." + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

ProblemKind parse_kind(const std::string& s) {
  if (s == "scalar2") return ProblemKind::ScalarTwoAgent;
  if (s == "quadratic") return ProblemKind::UncoupledQuadratic;
  if (s == "rlr") return ProblemKind::RobustLinearRegression;
  throw ConfigError("problem.kind must be one of scalar2, quadratic, rlr (got '" + s + "')");
}

ProblemBlock parse_problem(const json& j) {
  const std::string where = "problem";
  reject_unknown_keys(j, where,
                      {"kind", "m", "d", "n", "alpha", "seed", "radius_x", "radius_y", "data"});
  if (!j.contains("kind")) throw ConfigError("problem.kind is required");
  ProblemBlock p;
  p.kind = parse_kind(read_string(j, where, "kind"));

  const bool sized = j.contains("m") || j.contains("d") || j.contains("n");
  if (p.kind == ProblemKind::ScalarTwoAgent) {
    for (const char* key : {"m", "d", "n", "alpha", "seed", "radius_x", "radius_y", "data"})
      if (j.contains(key))
        throw ConfigError(std::string("key '") + key + "' in problem does not apply to scalar2");
    return p;
  }
  if (p.kind == ProblemKind::UncoupledQuadratic && j.contains("alpha"))
    throw ConfigError("key 'alpha' in problem does not apply to quadratic");
  if (p.kind == ProblemKind::RobustLinearRegression) {
    p.m = 10;
    p.d = 10;
    p.n = 50;
    if (j.contains("radius_x"))
      throw ConfigError("key 'radius_x' in problem does not apply to rlr (x is unconstrained)");
  }
  maybe(j, where, "m", p.m);
  maybe(j, where, "d", p.d);
  maybe(j, where, "n", p.n);
  maybe(j, where, "alpha", p.alpha);
  maybe(j, where, "seed", p.seed);
  maybe(j, where, "radius_x", p.radius_x);
  maybe(j, where, "radius_y", p.radius_y);
  if (j.contains("data")) {
    if (sized || j.contains("seed") || j.contains("alpha"))
      throw ConfigError("problem.data replaces generation; drop m/d/n/seed/alpha");
    p.data = read_string(j, where, "data");
  }
  for (const auto& r : {p.radius_x, p.radius_y})
    if (r && !(*r > 0.0)) throw ConfigError("problem radii must be positive");

  if (const char* env = std::getenv("FEDMM_SEED"); env != nullptr && *env != '\0') {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0' || env[0] == '-')
      throw ConfigError(std::string("FEDMM_SEED is not an unsigned integer: '") + env + "'");
    p.seed = v;
  }
  if (!p.data) {
    if (p.kind == ProblemKind::UncoupledQuadratic)
      QuadraticGenSpec{p.m, p.d, p.n, p.seed}.validate();
    else
      RlrGenSpec{p.m, p.d, p.n, p.alpha, p.seed}.validate();
  }
  return p;
}

AlgoBlock parse_algo(const json& j, const std::string& where) {
  reject_unknown_keys(j, where,
                      {"name", "K", "eta", "eta_x", "eta_y", "rounds", "init_x", "init_y",
                       "gap_tol", "step_tol", "parallel"});
  if (!j.contains("name")) throw ConfigError(where + ".name is required");
  AlgoBlock a;
  const std::string name = read_string(j, where, "name");
  const auto algo = parse_algorithm(name);
  if (!algo)
    throw ConfigError(where + ".name must be one of GDA, LocalSGDA, FedGDAGT (got '" + name + "')");
  a.algo = *algo;
  maybe(j, where, "K", a.K);
  maybe(j, where, "rounds", a.rounds);
  if (j.contains("eta") && (j.contains("eta_x") || j.contains("eta_y")))
    throw ConfigError(where + ": give either eta or eta_x/eta_y, not both");
  if (j.contains("eta")) {
    a.eta_x = read_number<double>(j, where, "eta");
    a.eta_y = a.eta_x;
  } else {
    maybe(j, where, "eta_x", a.eta_x);
    maybe(j, where, "eta_y", a.eta_y);
    if (a.eta_x.has_value() != a.eta_y.has_value())
      throw ConfigError(where + ": eta_x and eta_y must be given together");
  }
  maybe(j, where, "init_x", a.init_x);
  maybe(j, where, "init_y", a.init_y);
  maybe(j, where, "gap_tol", a.stop.gap_tol);
  maybe(j, where, "step_tol", a.stop.step_tol);
  a.parallel = read_bool(j, where, "parallel", false);

  if (a.K < 1) throw ConfigError(where + ".K must be >= 1");
  if (a.algo == Algorithm::GDA && j.contains("K") && a.K != 1)
    throw ConfigError(where + ".K must be 1 for GDA");
  if (a.rounds < 0) throw ConfigError(where + ".rounds must be >= 0");
  for (const auto& e : {a.eta_x, a.eta_y})
    if (e && !(*e > 0.0)) throw ConfigError(where + ": stepsizes must be positive");
  if (a.algo == Algorithm::FedGDAGT && a.eta_x && *a.eta_x != *a.eta_y)
    throw ConfigError(where + ": FedGDAGT takes a single eta");
  if (a.stop.gap_tol < 0.0 || a.stop.step_tol < 0.0)
    throw ConfigError(where + ": stop tolerances must be >= 0");
  return a;
}

OutputBlock parse_output(const json& j) {
  reject_unknown_keys(j, "output", {"trace", "emit_plot_data", "timing"});
  OutputBlock o;
  if (j.contains("trace")) o.trace = read_string(j, "output", "trace");
  o.emit_plot_data = read_bool(j, "output", "emit_plot_data", false);
  o.timing = read_bool(j, "output", "timing", false);
  if (o.emit_plot_data && !o.trace)
    throw ConfigError("output.emit_plot_data needs output.trace");
  return o;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    err << "fedmm: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ConfigError& e) {
    err << "fedmm: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "fedmm: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "fedmm: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string format_optional(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  reject_unknown_keys(j, "config", {"problem", "algo", "algos", "output"});
  if (!j.contains("problem")) throw ConfigError("config needs a 'problem' block");
  if (j.contains("algo") == j.contains("algos"))
    throw ConfigError("config needs exactly one of 'algo' or 'algos'");

  RunConfig cfg;
  cfg.problem = parse_problem(j.at("problem"));
  if (j.contains("algo")) {
    cfg.algos.push_back(parse_algo(j.at("algo"), "algo"));
  } else {
    const json& list = j.at("algos");
    if (!list.is_array() || list.empty()) throw ConfigError("'algos' must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i)
      cfg.algos.push_back(parse_algo(list[i], "algos[" + std::to_string(i) + "]"));
  }
  if (j.contains("output")) cfg.output = parse_output(j.at("output"));
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

MinimaxProblem build_problem(const ProblemBlock& block) {
  switch (block.kind) {
    case ProblemKind::ScalarTwoAgent:
      return make_scalar_two_agent();
    case ProblemKind::UncoupledQuadratic: {
      QuadraticData data;
      if (block.data) {
        if (peek_dataset_kind(*block.data) != DatasetKind::Quadratic)
          throw ConfigError("problem.data does not hold a quadratic dataset");
        data = read_quadratic_dataset(*block.data);
      } else {
        data = gen_quadratic_data({block.m, block.d, block.n, block.seed});
      }
      const auto d = static_cast<std::size_t>(data.Q.front().rows());
      ProductSet sets = ProductSet::unconstrained(d, d);
      if (block.radius_x) sets.set_x = FeasibleSet::ball(d, *block.radius_x);
      if (block.radius_y) sets.set_y = FeasibleSet::ball(d, *block.radius_y);
      return make_uncoupled_quadratic(std::move(data.Q), std::move(data.c), std::move(sets));
    }
    case ProblemKind::RobustLinearRegression: {
      RlrData data;
      if (block.data) {
        if (peek_dataset_kind(*block.data) != DatasetKind::Rlr)
          throw ConfigError("problem.data does not hold an rlr dataset");
        data = read_rlr_dataset(*block.data);
      } else {
        data = gen_rlr_data({block.m, block.d, block.n, block.alpha, block.seed});
      }
      return to_problem(data, block.radius_y.value_or(1.0));
    }
    case ProblemKind::Custom:
      break;
  }
  throw ConfigError("unsupported problem kind");
}

AlgoConfig resolve_algo(const AlgoBlock& block, const MinimaxProblem& problem) {
  AlgoConfig c;
  c.algo = block.algo;
  c.K = block.algo == Algorithm::GDA ? 1 : block.K;
  c.rounds = block.rounds;
  c.stop = block.stop;
  c.exec = block.parallel ? Execution::Parallel : Execution::Serial;
  if (block.eta_x) {
    c.eta_x = *block.eta_x;
    c.eta_y = *block.eta_y;
  } else {
    if (problem.kind() != ProblemKind::ScalarTwoAgent &&
        problem.kind() != ProblemKind::UncoupledQuadratic)
      throw ConfigError(std::string("no stepsize given and constants cannot be estimated for '") +
                        to_string(problem.kind()) + "'");
    c.eta_x = c.eta_y = auto_stepsize(problem, c.K);
  }
  if (block.init_x || block.init_y) {
    Iterate init = Iterate::zeros(problem.p(), problem.q());
    if (block.init_x) init.x.setConstant(*block.init_x);
    if (block.init_y) init.y.setConstant(*block.init_y);
    c.init = std::move(init);
  }
  c.validate();
  return c;
}

MetricOptions default_metrics(const MinimaxProblem& problem, bool timing) {
  MetricOptions metrics;
  metrics.timing = timing;
  if (problem.kind() == ProblemKind::ScalarTwoAgent ||
      problem.kind() == ProblemKind::UncoupledQuadratic)
    metrics.z_star = closed_form_minimax(problem);
  if (problem.kind() == ProblemKind::RobustLinearRegression)
    metrics.robust_loss = [&problem](const Vector& x) { return robust_loss(problem, x).value; };
  return metrics;
}

void write_csv_rows(std::ostream& os, const RunTrace& trace) {
  const AlgoConfig& c = trace.config;
  for (const RoundRecord& r : trace.records) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{}\n", r.round, to_string(c.algo), c.K, c.eta_x,
               c.eta_y, format_optional(r.gap_sq), r.grad_norm, format_optional(r.robust_loss),
               r.elapsed_ns ? fmt::format("{}", *r.elapsed_ns) : std::string());
  }
}

std::string trace_csv(const std::vector<RunTrace>& traces) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& t : traces) write_csv_rows(os, t);
  return os.str();
}

std::string plot_csv(const std::vector<RunTrace>& traces) {
  std::ostringstream os;
  os << "round,algorithm,K,x_0,y_0,x_norm,y_norm\n";
  for (const auto& t : traces)
    for (const auto& r : t.records)
      fmt::print(os, "{},{},{},{},{},{},{}\n", r.round, to_string(t.config.algo), t.config.K,
                 r.z.x(0), r.z.y(0), r.z.x.norm(), r.z.y.norm());
  return os.str();
}

namespace {

int execute(const RunConfig& cfg, std::ostream& out) {
  const MinimaxProblem problem = build_problem(cfg.problem);
  const MetricOptions metrics = default_metrics(problem, cfg.output.timing);
  std::vector<RunTrace> traces;
  for (const auto& block : cfg.algos)
    traces.push_back(run(problem, resolve_algo(block, problem), metrics));

  const std::string csv = trace_csv(traces);
  if (cfg.output.trace) {
    write_file(*cfg.output.trace, csv);
    if (cfg.output.emit_plot_data) {
      auto plot_path = *cfg.output.trace;
      plot_path.replace_extension(".plot.csv");
      write_file(plot_path, plot_csv(traces));
    }
    for (const auto& t : traces) {
      const RoundRecord& last = t.records.back();
      fmt::print(out, "{} K={} eta={} rounds={} grad_norm={}", to_string(t.config.algo), t.config.K,
                 t.config.eta_x, last.round, last.grad_norm);
      if (last.gap_sq) fmt::print(out, " gap_sq={}", *last.gap_sq);
      if (last.robust_loss) fmt::print(out, " robust_loss={}", *last.robust_loss);
      out << '\n';
    }
  } else {
    out << csv;
  }
  return kExitOk;
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_run_config(config_path);
    if (cfg.algos.size() != 1)
      throw ConfigError("run takes exactly one algorithm block (use compare for several)");
    return execute(cfg, out);
  });
}

int cmd_compare(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_run_config(config_path);
    if (cfg.algos.size() < 2) throw ConfigError("compare needs at least two entries in 'algos'");
    return execute(cfg, out);
  });
}

int cmd_fixed_point(int K, double eta, std::ostream& out, std::ostream& err, long max_rounds) {
  return guarded(err, [&] {
    if (K < 1) throw ConfigError("--K must be >= 1");
    if (!(eta > 0.0)) throw ConfigError("--eta must be positive");
    const FixedPointReport rep = scalar_fixed_point_report(K, eta, eta, max_rounds);
    fmt::print(out, "K={} eta_x={} eta_y={}\n", rep.K, rep.eta_x, rep.eta_y);
    fmt::print(out, "minimax point      x*={} y*={}\n", rep.z_star.x(0), rep.z_star.y(0));
    fmt::print(out, "closed-form fixed  x={} y={}\n", rep.z_closed_form.x(0),
               rep.z_closed_form.y(0));
    fmt::print(out, "simulated limit    x={} y={} (rounds={})\n", rep.z_fixed.x(0),
               rep.z_fixed.y(0), rep.rounds);
    fmt::print(out, "gap to minimax     {}\n", rep.gap);
    fmt::print(out, "formula agreement  {}\n", rep.agreement);
    fmt::print(out, "fixed-point residual {}\n", rep.residual_norm);
    fmt::print(out, "global grad norm   {}\n", rep.grad_norm);
    return kExitOk;
  });
}

int cmd_bounds(const std::filesystem::path& inputs_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    json j;
    try {
      j = json::parse(read_file(inputs_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    const std::string where = "bounds";
    reject_unknown_keys(j, where,
                        {"m", "n", "M_i", "cover_size", "delta", "epsilon", "L_y", "rademacher",
                         "vc_dim", "empirical_risk", "worst_case_empirical"});
    for (const char* key : {"m", "n", "M_i", "cover_size", "delta"})
      if (!j.contains(key)) throw ConfigError(std::string("bounds input needs '") + key + "'");

    BoundInputs in;
    in.m = read_number<std::size_t>(j, where, "m");
    in.n = read_number<std::size_t>(j, where, "n");
    in.cover_size = read_number<double>(j, where, "cover_size");
    in.delta = read_number<double>(j, where, "delta");
    maybe(j, where, "epsilon", in.epsilon);
    maybe(j, where, "L_y", in.L_y);
    maybe(j, where, "vc_dim", in.vc_dim);
    double empirical = 0.0;
    maybe(j, where, "empirical_risk", empirical);
    double worst_case = empirical;
    maybe(j, where, "worst_case_empirical", worst_case);

    // M_i: one profile [M_1..M_m] or a list of profiles, one per cover point y.
    std::vector<std::vector<double>> profiles;
    const json& M = j.at("M_i");
    if (!M.is_array() || M.empty()) throw ConfigError("bounds.M_i must be a non-empty array");
    try {
      if (M.front().is_array())
        profiles = M.get<std::vector<std::vector<double>>>();
      else
        profiles.push_back(M.get<std::vector<double>>());
    } catch (const json::exception&) {
      throw ConfigError("bounds.M_i must hold numbers or arrays of numbers");
    }
    double max_sum = 0.0;
    for (const auto& p : profiles) max_sum = std::max(max_sum, sum_of_squares(p));

    std::optional<double> vc_bound;
    if (in.vc_dim) vc_bound = vc_rademacher_bound(in.m, in.n, *in.vc_dim, max_sum);
    if (j.contains("rademacher")) {
      in.rademacher = read_number<double>(j, where, "rademacher");
    } else if (vc_bound) {
      in.rademacher = *vc_bound;
    } else {
      throw ConfigError("bounds input needs 'rademacher' or 'vc_dim'");
    }

    auto print = [&](const std::string& label, const BoundBreakdown& b) {
      fmt::print(out,
                 "{}: total={} empirical={} complexity={} concentration={} cover={}\n", label,
                 b.total, b.empirical, b.complexity, b.concentration, b.cover);
    };
    for (std::size_t k = 0; k < profiles.size(); ++k) {
      in.M = profiles[k];
      const std::string label =
          profiles.size() == 1 ? "pointwise" : "pointwise[y=" + std::to_string(k) + "]";
      print(label, pointwise_bound(in, empirical));
    }
    in.M = profiles.front();
    print("uniform", uniform_bound(in, profiles, worst_case));
    if (vc_bound) fmt::print(out, "vc: rademacher_bound={}\n", *vc_bound);
    return kExitOk;
  });
}

int cmd_gen_data(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_run_config(config_path);
    const ProblemBlock& p = cfg.problem;
    if (p.data) throw ConfigError("problem.data already names a dataset; nothing to generate");
    switch (p.kind) {
      case ProblemKind::UncoupledQuadratic: {
        const QuadraticData data = gen_quadratic_data({p.m, p.d, p.n, p.seed});
        write_dataset(out_path, data);
        fmt::print(out, "wrote quadratic dataset m={} d={} n={} seed={} to {}\n", data.Q.size(),
                   p.d, p.n, data.seed, out_path.string());
        return kExitOk;
      }
      case ProblemKind::RobustLinearRegression: {
        const RlrData data = gen_rlr_data({p.m, p.d, p.n, p.alpha, p.seed});
        write_dataset(out_path, data);
        fmt::print(out, "wrote rlr dataset m={} d={} n={} seed={} to {}\n", data.agents.size(),
                   p.d, p.n, data.seed, out_path.string());
        return kExitOk;
      }
      default:
        throw ConfigError("gen-data needs a quadratic or rlr problem");
    }
  });
}

}  // namespace fedmm
