#include "fedmm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedmm/algorithms.hpp"
#include "fedmm/datagen.hpp"

namespace fedmm {

double optimality_gap(const Iterate& z, const Iterate& z_star) {
  require_dim("optimality_gap x", z_star.p(), z.p());
  require_dim("optimality_gap y", z_star.q(), z.q());
  return (z.x - z_star.x).squaredNorm() + (z.y - z_star.y).squaredNorm();
}

namespace {

double scalar_fixed_point_coordinate(int K, double eta) {
  double num = 0.0;
  double den = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const double curvature = 2.0 * i * i;
    const double shift = 31.0 * i - 30.0;
    const double r = 1.0 - eta * curvature;
    if (!(std::abs(r) < 1.0))
      throw ConfigError("unstable stepsize " + std::to_string(eta) +
                        " for the scalar instance: need |1 - 2 eta i^2| < 1");
    double power = 1.0;
    for (int k = 0; k < K; ++k) {
      num += shift * power;
      den += curvature * power;
      power *= r;
    }
  }
  if (!(den > 0.0)) throw ConfigError("fixed-point denominator is not positive");
  return num / den;
}

}  // namespace

Iterate local_sgda_fixed_point_closed_form(int K, double eta_x, double eta_y) {
  if (K < 1) throw ConfigError("K must be >= 1");
  return {Vector::Constant(1, scalar_fixed_point_coordinate(K, eta_x)),
          Vector::Constant(1, scalar_fixed_point_coordinate(K, eta_y))};
}

FixedPointReport scalar_fixed_point_report(int K, double eta_x, double eta_y, long max_rounds,
                                           double step_tol, const Iterate& init) {
  FixedPointReport rep;
  rep.K = K;
  rep.eta_x = eta_x;
  rep.eta_y = eta_y;
  rep.z_closed_form = local_sgda_fixed_point_closed_form(K, eta_x, eta_y);

  const MinimaxProblem problem = make_scalar_two_agent();
  rep.z_star = closed_form_minimax(problem);

  AlgoConfig config = AlgoConfig::local_sgda(eta_x, eta_y, K, max_rounds);
  config.init = init;
  config.stop.step_tol = step_tol;
  MetricOptions metrics;
  metrics.timing = false;
  const RunTrace trace = local_sgda(problem, config, metrics);

  rep.z_fixed = trace.final_iterate;
  rep.rounds = trace.records.back().round;
  rep.gap = optimality_gap(rep.z_fixed, rep.z_star);
  rep.agreement = std::sqrt(optimality_gap(rep.z_fixed, rep.z_closed_form));
  rep.residual_norm = local_sgda_residual(problem, rep.z_fixed, K, eta_x, eta_y).norm();
  rep.grad_norm = trace.records.back().grad_norm;
  return rep;
}

// --- robust loss ---------------------------------------------------------------

namespace {

/// Sum over agents of f_i(x, y) and its y-gradient, ascending agent order.
double summed_value(const MinimaxProblem& problem, const Vector& x, const Vector& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < problem.m(); ++i) acc += problem.agent(i).value(x, y);
  return acc;
}

Vector summed_grad_y(const MinimaxProblem& problem, const Vector& x, const Vector& y) {
  Vector gx(x.size()), gy(y.size());
  Vector acc = Vector::Zero(y.size());
  for (std::size_t i = 0; i < problem.m(); ++i) {
    problem.agent(i).gradient(x, y, gx, gy);
    acc += gy;
  }
  return acc;
}

/// Largest eigenvalue magnitude of the y-Hessian at (x, y0) by power iteration on
/// gradient differences (exact for objectives quadratic in y).
double curvature_y(const MinimaxProblem& problem, const Vector& x, const Vector& y0) {
  const Vector g0 = summed_grad_y(problem, x, y0);
  NormalStream rng(0x5eed, 0, 0);
  Vector v(y0.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector hv = summed_grad_y(problem, x, y0 + v) - g0;
    const double next = hv.norm();
    if (next == 0.0) return 0.0;
    v = hv / next;
    if (std::abs(next - lambda) <= 1e-12 * next) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

RobustLossResult robust_loss(const MinimaxProblem& problem, const Vector& x_hat) {
  if (problem.kind() != ProblemKind::RobustLinearRegression)
    throw UnsupportedProblemError("robust_loss is defined for robust linear regression");
  require_dim("robust_loss x_hat", problem.p(), static_cast<std::size_t>(x_hat.size()));
  if (!x_hat.allFinite()) throw ConfigError("robust_loss: x_hat must be finite");

  constexpr double kTol = 1e-10;
  constexpr long kMaxSteps = 10'000;

  RobustLossResult out;
  Vector y = Vector::Zero(static_cast<Eigen::Index>(problem.q()));
  double best = summed_value(problem, x_hat, y);
  out.y = y;

  const double curvature = curvature_y(problem, x_hat, y);
  if (curvature == 0.0) {
    // Objective is affine (constant for RLR at x_hat = 0) in y; one ascent step
    // cannot be sized, and at x_hat = 0 there is nothing to maximize.
    out.value = best;
    return out;
  }
  const double step = 1.0 / curvature;
  const FeasibleSet& ball = problem.sets().set_y;

  out.converged = false;
  for (long s = 0; s < kMaxSteps; ++s) {
    Vector next = project(ball, y + step * summed_grad_y(problem, x_hat, y));
    const double moved = (next - y).norm();
    y = std::move(next);
    out.iterations = s + 1;
    const double value = summed_value(problem, x_hat, y);
    if (value > best) {
      best = value;
      out.y = y;
    }
    if (moved <= kTol) {
      out.converged = true;
      break;
    }
  }
  out.value = best;
  return out;
}

// --- monotonicity and contraction checks ----------------------------------------

namespace {

Iterate random_point(NormalStream& rng, std::size_t p, std::size_t q, double scale) {
  Iterate z = Iterate::zeros(p, q);
  for (Eigen::Index k = 0; k < z.x.size(); ++k) z.x(k) = rng(0.0, scale);
  for (Eigen::Index k = 0; k < z.y.size(); ++k) z.y(k) = rng(0.0, scale);
  return z;
}

}  // namespace

MonotonicityReport check_strong_monotonicity(const MinimaxProblem& problem, double mu, long trials,
                                             std::uint64_t seed, double scale,
                                             std::optional<std::size_t> agent) {
  if (trials < 1) throw ConfigError("check_strong_monotonicity: trials must be >= 1");
  NormalStream rng(seed, 0, 0);
  MonotonicityReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (long t = 0; t < trials; ++t) {
    const Iterate a = random_point(rng, problem.p(), problem.q(), scale);
    const Iterate b = random_point(rng, problem.p(), problem.q(), scale);
    const Vector dz = a.stacked() - b.stacked();
    const double dist2 = dz.squaredNorm();
    if (dist2 == 0.0) continue;
    const double inner =
        (stacked_field(problem, a, agent) - stacked_field(problem, b, agent)).dot(dz);
    rep.min_ratio = std::min(rep.min_ratio, inner / dist2);
    if (inner < mu * dist2 - 1e-9) {
      ++rep.violations;
      if (!rep.witness) rep.witness = std::make_pair(a, b);
    }
  }
  rep.passed = rep.violations == 0;
  return rep;
}

ContractionReport check_contraction(const MinimaxProblem& problem, double mu, double L, double eta,
                                    long trials, std::uint64_t seed, double scale,
                                    std::optional<std::size_t> agent) {
  if (trials < 1) throw ConfigError("check_contraction: trials must be >= 1");
  NormalStream rng(seed, 0, 1);
  ContractionReport rep;
  rep.factor = 1.0 - eta * (2.0 * mu - eta * L * L);
  for (long t = 0; t < trials; ++t) {
    const Iterate a = random_point(rng, problem.p(), problem.q(), scale);
    const Iterate b = random_point(rng, problem.p(), problem.q(), scale);
    const Vector ua = a.stacked() - eta * stacked_field(problem, a, agent);
    const Vector ub = b.stacked() - eta * stacked_field(problem, b, agent);
    const double before = (a.stacked() - b.stacked()).squaredNorm();
    if (before == 0.0) continue;
    const double after = (ua - ub).squaredNorm();
    rep.max_ratio = std::max(rep.max_ratio, after / before);
    if (after > rep.factor * before * (1.0 + 1e-12)) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

DecayFit fit_decay_ratio(std::span<const double> gaps, std::size_t first) {
  DecayFit fit;
  std::size_t last = first;
  while (last < gaps.size() && gaps[last] > 0.0 && std::isfinite(gaps[last])) ++last;
  if (last <= first + 1) return fit;

  // log g_t = a + t log rho
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  const auto count = static_cast<double>(last - first);
  for (std::size_t t = first; t < last; ++t) {
    const double tt = static_cast<double>(t);
    const double lg = std::log(gaps[t]);
    st += tt;
    sl += lg;
    stt += tt * tt;
    stl += tt * lg;
  }
  const double slope = (count * stl - st * sl) / (count * stt - st * st);
  fit.rho_hat = std::exp(slope);
  fit.samples = last - first;
  for (std::size_t t = first; t + 1 < last; ++t)
    fit.max_ratio = std::max(fit.max_ratio, gaps[t + 1] / gaps[t]);
  return fit;
}

}  // namespace fedmm
