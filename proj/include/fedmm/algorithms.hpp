#pragma once

// Centralized GDA, Local SGDA with full gradients, and FedGDA-GT.
//
// Every algorithm is driven round by round: round t starts from the server
// iterate z^t, each agent runs its local work independently, and the server
// reduces the agents' results in ascending agent order. With
// Execution::Parallel the agent loop runs under OpenMP; the reduction order is
// unchanged, so serial and parallel traces are bitwise identical.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedmm/problems.hpp"

namespace fedmm {

enum class Algorithm { GDA, LocalSGDA, FedGDAGT };

const char* to_string(Algorithm algo);
std::optional<Algorithm> parse_algorithm(std::string_view name);

enum class Execution { Serial, Parallel };

/// Early exit. A zero threshold disables the corresponding test.
struct StopRule {
  double gap_tol = 0.0;   // stop once gap_sq <= gap_tol (needs a reference point)
  double step_tol = 0.0;  // stop once |z^{t+1} - z^t| <= step_tol
};

struct AlgoConfig {
  Algorithm algo = Algorithm::FedGDAGT;
  double eta_x = 0.0;
  double eta_y = 0.0;
  int K = 1;
  long rounds = 0;
  std::optional<Iterate> init;  // zeros when unset
  StopRule stop;
  Execution exec = Execution::Serial;

  static AlgoConfig gda(double eta_x, double eta_y, long rounds);
  static AlgoConfig local_sgda(double eta_x, double eta_y, int K, long rounds);
  /// FedGDA-GT uses one stepsize for both players.
  static AlgoConfig fedgda_gt(double eta, int K, long rounds);

  /// Throws ConfigError on non-positive stepsizes, K < 1, negative rounds,
  /// GDA with K != 1, or FedGDA-GT with eta_x != eta_y.
  void validate() const;
};

/// Optional per-round metrics.
struct MetricOptions {
  std::optional<Iterate> z_star;                          // enables gap_sq
  std::function<double(const Vector& x)> robust_loss;     // enables robust_loss
  bool timing = true;                                     // enables elapsed_ns
};

struct RoundRecord {
  long round = 0;
  Iterate z;
  std::optional<double> gap_sq;
  double grad_norm = 0.0;
  std::optional<double> robust_loss;
  std::optional<std::int64_t> elapsed_ns;
};

struct RunTrace {
  AlgoConfig config;
  std::vector<RoundRecord> records;  // rounds 0..T (fewer if a StopRule fired)
  Iterate final_iterate;
};

/// Iterates with |z| above this abort the run with DivergenceError.
inline constexpr double kDivergenceNorm = 1e12;

/// One projected GDA step: x - eta_x grad_x f, y + eta_y grad_y f, then project.
Iterate gda_step(const MinimaxProblem& problem, const Iterate& z, double eta_x, double eta_y);

RunTrace run_gda(const MinimaxProblem& problem, const AlgoConfig& config,
                 const MetricOptions& metrics = {});

/// K uncorrected local GDA steps per agent, then server averaging. The average
/// is projected onto the feasible product set (a no-op for unconstrained problems).
RunTrace local_sgda(const MinimaxProblem& problem, const AlgoConfig& config,
                    const MetricOptions& metrics = {});

/// K gradient-tracking local steps per agent: each local direction is the agent's
/// gradient plus the correction (global - local) frozen at z^t. The average is projected.
RunTrace fedgda_gt(const MinimaxProblem& problem, const AlgoConfig& config,
                   const MetricOptions& metrics = {});

/// Dispatches on config.algo.
RunTrace run(const MinimaxProblem& problem, const AlgoConfig& config,
             const MetricOptions& metrics = {});

/// (D_i^k(z), A_i^k(z)): k joint uncorrected GDA steps under agent i's objective.
Iterate operator_compose(const MinimaxProblem& problem, std::size_t agent, int k, double eta_x,
                         double eta_y, const Iterate& z);

/// (1/m) sum_i sum_{k<K} grad f_i(D_i^k(z), A_i^k(z)), stacked as [x-block; y-block].
/// Vanishes at any fixed point of Local SGDA.
Vector local_sgda_residual(const MinimaxProblem& problem, const Iterate& z, int K, double eta_x,
                           double eta_y);

/// eta = 1/2 * min{2 mu / L^2, 1 / (2 mu K)} from estimated constants.
double auto_stepsize(const ProblemConstants& constants, int K);
double auto_stepsize(const MinimaxProblem& problem, int K);

}  // namespace fedmm
