#pragma once

// Experiment harness behind the `fedmm` CLI: JSON run configs, problem
// construction, CSV traces and the subcommand entry points.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fedmm/algorithms.hpp"
#include "fedmm/datagen.hpp"
#include "fedmm/problems.hpp"

namespace fedmm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

inline constexpr const char* kCsvHeader =
    "round,algorithm,K,eta_x,eta_y,gap_sq,grad_norm,robust_loss,elapsed_ns";

struct ProblemBlock {
  ProblemKind kind = ProblemKind::ScalarTwoAgent;
  std::size_t m = 20;
  std::size_t d = 50;
  std::size_t n = 500;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::optional<double> radius_x;
  std::optional<double> radius_y;
  std::optional<std::filesystem::path> data;
};

struct AlgoBlock {
  Algorithm algo = Algorithm::FedGDAGT;
  int K = 1;
  std::optional<double> eta_x;  // unset: auto stepsize (closed-form problems only)
  std::optional<double> eta_y;
  long rounds = 100;
  std::optional<double> init_x;  // constant fill of the initial iterate
  std::optional<double> init_y;
  StopRule stop;
  bool parallel = false;
};

struct OutputBlock {
  std::optional<std::filesystem::path> trace;
  bool emit_plot_data = false;
  bool timing = false;
};

struct RunConfig {
  ProblemBlock problem;
  std::vector<AlgoBlock> algos;
  OutputBlock output;
};

/// Parses and validates a JSON config. Unknown keys, wrong types and
/// out-of-range values throw ConfigError naming the offending key.
/// FEDMM_SEED, when set, replaces problem.seed.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds (or loads, when problem.data is set) the federation.
MinimaxProblem build_problem(const ProblemBlock& block);

/// Resolves stepsizes (auto when unset) and fills the AlgoConfig.
AlgoConfig resolve_algo(const AlgoBlock& block, const MinimaxProblem& problem);

/// Metrics enabled for the problem kind: gap_sq when a closed form exists,
/// robust loss for RLR.
MetricOptions default_metrics(const MinimaxProblem& problem, bool timing);

void write_csv_rows(std::ostream& os, const RunTrace& trace);
std::string trace_csv(const std::vector<RunTrace>& traces);
/// Per-round iterate summary used for trajectory figures.
std::string plot_csv(const std::vector<RunTrace>& traces);

// Subcommands. Output goes to `out`, one-line failure reasons to `err`.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_compare(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_fixed_point(int K, double eta, std::ostream& out, std::ostream& err,
                    long max_rounds = 1'000'000);
int cmd_bounds(const std::filesystem::path& inputs_path, std::ostream& out, std::ostream& err);
int cmd_gen_data(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
                 std::ostream& out, std::ostream& err);

}  // namespace fedmm
