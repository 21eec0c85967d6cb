#pragma once

// Metrics, fixed-point analysis of Local SGDA on the two-agent scalar instance,
// robust-loss evaluation and randomized monotonicity and contraction checks.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "fedmm/problems.hpp"

namespace fedmm {

/// |x - x*|^2 + |y - y*|^2
double optimality_gap(const Iterate& z, const Iterate& z_star);

/// Fixed point of full-gradient Local SGDA on the two-agent scalar instance:
/// x = sum_i sum_{k<K} (31i - 30) r_i^k / sum_i sum_{k<K} 2 i^2 r_i^k with r_i = 1 - 2 eta_x i^2
/// (and the same in eta_y for y). Requires |1 - 2 eta i^2| < 1 for i = 1, 2.
Iterate local_sgda_fixed_point_closed_form(int K, double eta_x, double eta_y);

struct FixedPointReport {
  Iterate z_fixed;        // simulated Local SGDA limit
  Iterate z_closed_form;  // formula value
  Iterate z_star;         // true minimax point (3.3, 3.3)
  double gap = 0.0;       // |z_fixed - z_star|^2
  double agreement = 0.0; // |z_fixed - z_closed_form|
  double residual_norm = 0.0;
  double grad_norm = 0.0;  // |grad f(z_fixed)|
  long rounds = 0;         // rounds the simulation used
  int K = 1;
  double eta_x = 0.0;
  double eta_y = 0.0;
};

/// Runs Local SGDA on the scalar instance from `init` until successive server
/// iterates differ by at most step_tol (or max_rounds), and compares the limit
/// with the closed form.
FixedPointReport scalar_fixed_point_report(int K, double eta_x, double eta_y,
                                           long max_rounds = 1'000'000, double step_tol = 1e-14,
                                           const Iterate& init = Iterate::zeros(1, 1));

struct RobustLossResult {
  double value = 0.0;
  Vector y;             // maximizer found
  long iterations = 0;
  bool converged = true;  // false: step cap hit, value is the best seen
};

/// max_{y in Y} sum_i f_i(x_hat, y) by projected gradient ascent on y from y = 0 with
/// step 1/L_y (power-iteration curvature estimate), tolerance 1e-10 and 10^4 steps.
/// Sums over agents (not the mean), so the result is m times the averaged objective.
RobustLossResult robust_loss(const MinimaxProblem& problem, const Vector& x_hat);

struct MonotonicityReport {
  bool passed = true;
  double min_ratio = 0.0;  // min <F(z)-F(z'), z-z'> / |z-z'|^2 observed
  long violations = 0;
  std::optional<std::pair<Iterate, Iterate>> witness;
};

/// Samples `trials` pairs z, z' ~ N(0, scale^2 I) and checks
/// <F(z)-F(z'), z-z'> >= mu |z-z'|^2 - 1e-9 for the averaged field (or one agent's).
MonotonicityReport check_strong_monotonicity(const MinimaxProblem& problem, double mu, long trials,
                                             std::uint64_t seed = 1, double scale = 1.0,
                                             std::optional<std::size_t> agent = std::nullopt);

struct ContractionReport {
  bool passed = true;
  double factor = 0.0;     // 1 - eta (2 mu - eta L^2)
  double max_ratio = 0.0;  // max |(u - eta F(u)) - (v - eta F(v))|^2 / |u - v|^2 observed
  long violations = 0;
};

/// Checks |(u - eta F(u)) - (v - eta F(v))|^2 <= (1 - eta(2mu - eta L^2)) |u - v|^2
/// up to a relative slack of 1e-12.
ContractionReport check_contraction(const MinimaxProblem& problem, double mu, double L, double eta,
                                    long trials, std::uint64_t seed = 1, double scale = 1.0,
                                    std::optional<std::size_t> agent = std::nullopt);

struct DecayFit {
  double rho_hat = 1.0;    // least-squares geometric rate of the sequence
  double max_ratio = 0.0;  // max consecutive ratio
  std::size_t samples = 0;
};

/// Fits gaps[t] ~ C rho^t on t >= first (log-linear least squares) and reports the
/// worst consecutive ratio over the same range. Non-positive entries end the range.
DecayFit fit_decay_ratio(std::span<const double> gaps, std::size_t first = 1);

}  // namespace fedmm
