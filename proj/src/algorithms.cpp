#include "fedmm/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fedmm/analysis.hpp"
#include "parallel.hpp"

namespace fedmm {

const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::GDA:
      return "GDA";
    case Algorithm::LocalSGDA:
      return "LocalSGDA";
    case Algorithm::FedGDAGT:
      return "FedGDAGT";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "GDA") return Algorithm::GDA;
  if (name == "LocalSGDA") return Algorithm::LocalSGDA;
  if (name == "FedGDAGT") return Algorithm::FedGDAGT;
  return std::nullopt;
}

AlgoConfig AlgoConfig::gda(double eta_x, double eta_y, long rounds) {
  AlgoConfig c;
  c.algo = Algorithm::GDA;
  c.eta_x = eta_x;
  c.eta_y = eta_y;
  c.K = 1;
  c.rounds = rounds;
  return c;
}

AlgoConfig AlgoConfig::local_sgda(double eta_x, double eta_y, int K, long rounds) {
  AlgoConfig c;
  c.algo = Algorithm::LocalSGDA;
  c.eta_x = eta_x;
  c.eta_y = eta_y;
  c.K = K;
  c.rounds = rounds;
  return c;
}

AlgoConfig AlgoConfig::fedgda_gt(double eta, int K, long rounds) {
  AlgoConfig c;
  c.algo = Algorithm::FedGDAGT;
  c.eta_x = eta;
  c.eta_y = eta;
  c.K = K;
  c.rounds = rounds;
  return c;
}

void AlgoConfig::validate() const {
  if (!(eta_x > 0.0) || !std::isfinite(eta_x) || !(eta_y > 0.0) || !std::isfinite(eta_y))
    throw ConfigError("stepsizes must be positive and finite");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (algo == Algorithm::GDA && K != 1) throw ConfigError("GDA runs with K = 1");
  if (algo == Algorithm::FedGDAGT && eta_x != eta_y)
    throw ConfigError("FedGDAGT uses a single stepsize (eta_x must equal eta_y)");
  if (stop.gap_tol < 0.0 || stop.step_tol < 0.0)
    throw ConfigError("stop tolerances must be >= 0");
}

namespace {

/// Local and averaged gradients at the server iterate of one round.
struct RoundGradients {
  std::vector<Vector> gx;
  std::vector<Vector> gy;
  GlobalGradient global;
};

RoundGradients gradients_at(const MinimaxProblem& problem, const Iterate& z, Execution exec) {
  const std::size_t m = problem.m();
  RoundGradients out;
  out.gx.assign(m, Vector(static_cast<Eigen::Index>(problem.p())));
  out.gy.assign(m, Vector(static_cast<Eigen::Index>(problem.q())));
  detail::for_each_index(exec, m, [&](std::size_t i) {
    problem.agent(i).gradient(z.x, z.y, out.gx[i], out.gy[i]);
  });
  out.global = {mean_ascending(out.gx), mean_ascending(out.gy)};
  return out;
}

/// Server aggregation shared by the federated algorithms.
Iterate average_and_project(const MinimaxProblem& problem, const std::vector<Iterate>& local) {
  std::vector<Vector> xs, ys;
  xs.reserve(local.size());
  ys.reserve(local.size());
  for (const auto& z : local) {
    xs.push_back(z.x);
    ys.push_back(z.y);
  }
  return project(problem.sets(), Iterate{mean_ascending(xs), mean_ascending(ys)});
}

using StepFn = std::function<Iterate(const Iterate& z, const RoundGradients& grads)>;

/// Shared round loop: records metrics for z^t, applies `step`, guards divergence
/// and evaluates the stop rule.
RunTrace drive(const MinimaxProblem& problem, const AlgoConfig& config,
               const MetricOptions& metrics, const StepFn& step) {
  config.validate();
  Iterate z = config.init ? *config.init : Iterate::zeros(problem.p(), problem.q());
  problem.check_dims(z);
  if (!z.all_finite()) throw ConfigError("initial iterate must be finite");
  if (metrics.z_star) problem.check_dims(*metrics.z_star);
  if (config.stop.gap_tol > 0.0 && !metrics.z_star)
    throw ConfigError("gap_tol stop rule needs a reference point");

  RunTrace trace;
  trace.config = config;
  trace.records.reserve(static_cast<std::size_t>(std::min<long>(config.rounds, 1'000'000)) + 1);
  const auto start = std::chrono::steady_clock::now();

  auto record = [&](long t, const Iterate& z_t, const RoundGradients& grads) {
    RoundRecord rec;
    rec.round = t;
    rec.z = z_t;
    rec.grad_norm = grads.global.norm();
    if (metrics.z_star) rec.gap_sq = optimality_gap(z_t, *metrics.z_star);
    if (metrics.robust_loss) rec.robust_loss = metrics.robust_loss(z_t.x);
    if (metrics.timing)
      rec.elapsed_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    trace.records.push_back(std::move(rec));
    return config.stop.gap_tol > 0.0 && *trace.records.back().gap_sq <= config.stop.gap_tol;
  };

  RoundGradients grads = gradients_at(problem, z, config.exec);
  bool done = record(0, z, grads) || config.rounds == 0;
  for (long t = 0; !done; ++t) {
    Iterate next = step(z, grads);
    const double norm = std::sqrt(squared_norm(next));
    if (!next.all_finite() || norm > kDivergenceNorm) throw DivergenceError(t + 1, norm);

    const bool stalled =
        config.stop.step_tol > 0.0 && std::sqrt(optimality_gap(next, z)) <= config.stop.step_tol;
    z = std::move(next);
    grads = gradients_at(problem, z, config.exec);
    done = record(t + 1, z, grads) || stalled || t + 1 == config.rounds;
  }
  trace.final_iterate = trace.records.back().z;
  return trace;
}

}  // namespace

Iterate gda_step(const MinimaxProblem& problem, const Iterate& z, double eta_x, double eta_y) {
  const GlobalGradient g = global_grad(problem, z);
  return project(problem.sets(), Iterate{z.x - eta_x * g.gx, z.y + eta_y * g.gy});
}

RunTrace run_gda(const MinimaxProblem& problem, const AlgoConfig& config,
                 const MetricOptions& metrics) {
  if (config.algo != Algorithm::GDA) throw ConfigError("run_gda called with a non-GDA config");
  return drive(problem, config, metrics, [&](const Iterate& z, const RoundGradients& grads) {
    return project(problem.sets(), Iterate{z.x - config.eta_x * grads.global.gx,
                                           z.y + config.eta_y * grads.global.gy});
  });
}

RunTrace local_sgda(const MinimaxProblem& problem, const AlgoConfig& config,
                    const MetricOptions& metrics) {
  if (config.algo != Algorithm::LocalSGDA)
    throw ConfigError("local_sgda called with a non-LocalSGDA config");
  const std::size_t m = problem.m();
  return drive(problem, config, metrics, [&](const Iterate& z, const RoundGradients& grads) {
    std::vector<Iterate> local(m);
    detail::for_each_index(config.exec, m, [&](std::size_t i) {
      const LocalObjective& f = problem.agent(i);
      Vector x = z.x, y = z.y;
      Vector gx = grads.gx[i], gy = grads.gy[i];  // gradients at z^t serve step k = 0
      for (int k = 0; k < config.K; ++k) {
        if (k > 0) f.gradient(x, y, gx, gy);
        x -= config.eta_x * gx;
        y += config.eta_y * gy;
      }
      local[i] = Iterate{std::move(x), std::move(y)};
    });
    return average_and_project(problem, local);
  });
}

RunTrace fedgda_gt(const MinimaxProblem& problem, const AlgoConfig& config,
                   const MetricOptions& metrics) {
  if (config.algo != Algorithm::FedGDAGT)
    throw ConfigError("fedgda_gt called with a non-FedGDAGT config");
  const std::size_t m = problem.m();
  const double eta = config.eta_x;
  return drive(problem, config, metrics, [&](const Iterate& z, const RoundGradients& grads) {
    std::vector<Iterate> local(m);
    detail::for_each_index(config.exec, m, [&](std::size_t i) {
      const LocalObjective& f = problem.agent(i);
      // Tracking correction, frozen for the round: global minus local gradient at z^t.
      const Vector cx = grads.global.gx - grads.gx[i];
      const Vector cy = grads.global.gy - grads.gy[i];
      Vector x = z.x, y = z.y;
      Vector gx = grads.gx[i], gy = grads.gy[i];
      for (int k = 0; k < config.K; ++k) {
        if (k > 0) f.gradient(x, y, gx, gy);
        gx += cx;
        gy += cy;
        x -= eta * gx;
        y += eta * gy;
      }
      local[i] = Iterate{std::move(x), std::move(y)};
    });
    return average_and_project(problem, local);
  });
}

RunTrace run(const MinimaxProblem& problem, const AlgoConfig& config,
             const MetricOptions& metrics) {
  switch (config.algo) {
    case Algorithm::GDA:
      return run_gda(problem, config, metrics);
    case Algorithm::LocalSGDA:
      return local_sgda(problem, config, metrics);
    case Algorithm::FedGDAGT:
      return fedgda_gt(problem, config, metrics);
  }
  throw ConfigError("unknown algorithm");
}

Iterate operator_compose(const MinimaxProblem& problem, std::size_t agent, int k, double eta_x,
                         double eta_y, const Iterate& z) {
  problem.check_dims(z);
  if (k < 0) throw ConfigError("operator_compose: k must be >= 0");
  if (agent >= problem.m()) throw ConfigError("operator_compose: agent index out of range");
  const LocalObjective& f = problem.agent(agent);
  Vector x = z.x, y = z.y;
  Vector gx(x.size()), gy(y.size());
  for (int s = 0; s < k; ++s) {
    f.gradient(x, y, gx, gy);
    x -= eta_x * gx;
    y += eta_y * gy;
  }
  return {std::move(x), std::move(y)};
}

Vector local_sgda_residual(const MinimaxProblem& problem, const Iterate& z, int K, double eta_x,
                           double eta_y) {
  problem.check_dims(z);
  if (K < 1) throw ConfigError("local_sgda_residual: K must be >= 1");
  const std::size_t m = problem.m();
  std::vector<Vector> sx(m), sy(m);
  for (std::size_t i = 0; i < m; ++i) {
    const LocalObjective& f = problem.agent(i);
    Vector x = z.x, y = z.y;
    Vector gx(x.size()), gy(y.size());
    sx[i] = Vector::Zero(x.size());
    sy[i] = Vector::Zero(y.size());
    for (int k = 0; k < K; ++k) {
      f.gradient(x, y, gx, gy);  // gradient at (D_i^k(z), A_i^k(z))
      sx[i] += gx;
      sy[i] += gy;
      x -= eta_x * gx;
      y += eta_y * gy;
    }
  }
  Vector out(static_cast<Eigen::Index>(problem.p() + problem.q()));
  out << mean_ascending(sx), mean_ascending(sy);
  return out;
}

double auto_stepsize(const ProblemConstants& c, int K) {
  if (!(c.mu > 0.0) || !(c.L > 0.0))
    throw ConfigError("auto stepsize needs mu > 0 and L > 0");
  if (K < 1) throw ConfigError("auto stepsize needs K >= 1");
  return 0.5 * std::min(2.0 * c.mu / (c.L * c.L), 1.0 / (2.0 * c.mu * K));
}

double auto_stepsize(const MinimaxProblem& problem, int K) {
  return auto_stepsize(estimate_constants(problem), K);
}

}  // namespace fedmm
