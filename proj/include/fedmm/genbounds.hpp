#pragma once

// Generalization bounds for federated minimax learning and a Monte-Carlo
// estimator of empirical Rademacher complexity over a finite candidate set.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedmm/core.hpp"

namespace fedmm {

struct BoundInputs {
  std::size_t m = 1;               // agents
  std::size_t n = 1;               // samples per agent
  std::vector<double> M;           // M_i(y) > 0, one per agent
  double cover_size = 1.0;         // |Y_eps| >= 1
  double delta = 0.05;             // in (0, 1)
  double epsilon = 0.0;            // cover radius, > 0 in a meaningful bound
  double L_y = 0.0;                // Lipschitz constant of the loss in y
  double rademacher = 0.0;         // R(X, y) or R(X, Y)
  std::optional<std::size_t> vc_dim;

  /// Throws ConfigError: m, n >= 1, |M| = m, M_i >= 0, cover_size >= 1,
  /// 0 < delta < 1, epsilon >= 0, L_y >= 0, rademacher >= 0.
  void validate() const;
};

/// Right-hand side of a bound, split into its additive terms.
struct BoundBreakdown {
  double empirical = 0.0;      // f(x, y) or g(x)
  double complexity = 0.0;     // 2 R
  double concentration = 0.0;  // sqrt(sum_i M_i^2 / (2 m^2 n) * log(|Y_eps| / delta))
  double cover = 0.0;          // 2 L_y eps
  double total = 0.0;
};

/// R(x,y) <= f(x,y) + 2 R(X,y) + sqrt(sum_i M_i^2(y)/(2 m^2 n) log(|Y_eps|/delta)) + 2 L_y eps.
BoundBreakdown pointwise_bound(const BoundInputs& inputs, double empirical_risk);

/// Worst-case version with max_y sum_i M_i^2(y) supplied directly.
BoundBreakdown uniform_bound(const BoundInputs& inputs, double max_sum_M2,
                                double worst_case_empirical);
/// Worst-case version; the max over y is taken over the supplied M-profiles (one per y).
BoundBreakdown uniform_bound(const BoundInputs& inputs,
                                std::span<const std::vector<double>> M_profiles,
                                double worst_case_empirical);

/// sqrt(2 d max_sum_M2 / (m^2 n) (1 + log(mn/d))); requires mn >= d >= 1.
double vc_rademacher_bound(std::size_t m, std::size_t n, std::size_t d, double max_sum_M2);

double sum_of_squares(std::span<const double> values);

/// Losses l(x, y; xi_{i,j}) at a fixed y: one row per candidate x, one column per
/// sample in agent-major order (column i*n + j).
struct FiniteHypothesisSample {
  Matrix loss_table;
};

struct RademacherEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long draws = 0;
};

/// Conditional (empirical) Rademacher complexity E_sigma[max_rows (1/N) sum_k sigma_k l_k]
/// by Monte Carlo. Draws are split into fixed shards with their own substreams and
/// reduced in shard order, so the result does not depend on the thread count.
RademacherEstimate estimate_rademacher(const FiniteHypothesisSample& sample, long num_sigma_draws,
                                       std::uint64_t seed, bool parallel = false);

/// Massart cap: max_row_norm * sqrt(2 log #rows) / N.
double massart_cap(const FiniteHypothesisSample& sample);

}  // namespace fedmm
