#include "fedmm/genbounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "parallel.hpp"

namespace fedmm {

void BoundInputs::validate() const {
  if (m < 1) throw ConfigError("bounds: m must be >= 1");
  if (n < 1) throw ConfigError("bounds: n must be >= 1");
  if (M.size() != m)
    throw ConfigError("bounds: M_i must list one value per agent (" + std::to_string(m) +
                      "), got " + std::to_string(M.size()));
  for (double v : M)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("bounds: M_i must be finite and >= 0");
  if (!(cover_size >= 1.0) || !std::isfinite(cover_size))
    throw ConfigError("bounds: cover_size must be >= 1");
  if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("bounds: delta must lie in (0, 1)");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw ConfigError("bounds: epsilon must be finite and >= 0");
  if (!(L_y >= 0.0) || !std::isfinite(L_y)) throw ConfigError("bounds: L_y must be finite and >= 0");
  if (!(rademacher >= 0.0) || !std::isfinite(rademacher))
    throw ConfigError("bounds: rademacher must be finite and >= 0");
  if (vc_dim && *vc_dim < 1) throw ConfigError("bounds: vc_dim must be >= 1");
}

double sum_of_squares(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

namespace {

BoundBreakdown assemble(const BoundInputs& in, double sum_M2, double empirical) {
  const double m = static_cast<double>(in.m);
  const double n = static_cast<double>(in.n);
  BoundBreakdown b;
  b.empirical = empirical;
  b.complexity = 2.0 * in.rademacher;
  b.concentration = std::sqrt(sum_M2 / (2.0 * m * m * n) * std::log(in.cover_size / in.delta));
  b.cover = 2.0 * in.L_y * in.epsilon;
  b.total = b.empirical + b.complexity + b.concentration + b.cover;
  return b;
}

}  // namespace

BoundBreakdown pointwise_bound(const BoundInputs& inputs, double empirical_risk) {
  inputs.validate();
  return assemble(inputs, sum_of_squares(inputs.M), empirical_risk);
}

BoundBreakdown uniform_bound(const BoundInputs& inputs, double max_sum_M2,
                                double worst_case_empirical) {
  inputs.validate();
  if (!(max_sum_M2 >= 0.0) || !std::isfinite(max_sum_M2))
    throw ConfigError("bounds: max_y sum_i M_i^2 must be finite and >= 0");
  return assemble(inputs, max_sum_M2, worst_case_empirical);
}

BoundBreakdown uniform_bound(const BoundInputs& inputs,
                                std::span<const std::vector<double>> M_profiles,
                                double worst_case_empirical) {
  if (M_profiles.empty()) throw ConfigError("bounds: need at least one M profile");
  double worst = 0.0;
  for (const auto& profile : M_profiles) {
    if (profile.size() != inputs.m)
      throw ConfigError("bounds: every M profile needs one value per agent");
    worst = std::max(worst, sum_of_squares(profile));
  }
  return uniform_bound(inputs, worst, worst_case_empirical);
}

double vc_rademacher_bound(std::size_t m, std::size_t n, std::size_t d, double max_sum_M2) {
  if (m < 1 || n < 1) throw ConfigError("vc bound: m and n must be >= 1");
  if (d < 1) throw ConfigError("vc bound: VC dimension must be >= 1");
  if (m * n < d) throw ConfigError("vc bound: needs mn >= d");
  if (!(max_sum_M2 >= 0.0)) throw ConfigError("vc bound: sum of M_i^2 must be >= 0");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return std::sqrt(2.0 * dd * max_sum_M2 / (md * md * nd) * (1.0 + std::log(md * nd / dd)));
}

// --- Monte-Carlo Rademacher ----------------------------------------------------

namespace {

constexpr std::size_t kShards = 64;

struct ShardSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

}  // namespace

RademacherEstimate estimate_rademacher(const FiniteHypothesisSample& sample, long num_sigma_draws,
                                       std::uint64_t seed, bool parallel) {
  const Matrix& table = sample.loss_table;
  if (table.rows() == 0) throw ConfigError("estimate_rademacher: empty candidate set");
  if (table.cols() == 0) throw ConfigError("estimate_rademacher: no samples");
  if (num_sigma_draws < 1) throw ConfigError("estimate_rademacher: need at least one draw");
  if (!table.allFinite()) throw ConfigError("estimate_rademacher: loss table must be finite");

  const auto total = static_cast<std::size_t>(num_sigma_draws);
  const double inv_n = 1.0 / static_cast<double>(table.cols());
  std::vector<ShardSums> shards(kShards);

  detail::for_each_index(parallel ? Execution::Parallel : Execution::Serial, kShards,
                         [&](std::size_t s) {
    const std::size_t draws = total / kShards + (s < total % kShards ? 1 : 0);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), 0x52414445u};
    std::mt19937_64 engine(seq);
    Vector sigma(table.cols());
    ShardSums acc;
    for (std::size_t dr = 0; dr < draws; ++dr) {
      std::uint64_t bits = 0;
      for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (k % 64 == 0) bits = engine();
        sigma(k) = (bits & 1u) ? 1.0 : -1.0;
        bits >>= 1;
      }
      const double value = (table * sigma).maxCoeff() * inv_n;
      acc.sum += value;
      acc.sum_sq += value * value;
    }
    shards[s] = acc;
  });

  ShardSums all;
  for (const auto& s : shards) {
    all.sum += s.sum;
    all.sum_sq += s.sum_sq;
  }
  const double count = static_cast<double>(total);
  RademacherEstimate est;
  est.draws = num_sigma_draws;
  est.value = all.sum / count;
  if (total > 1) {
    const double var = std::max(0.0, (all.sum_sq - count * est.value * est.value) / (count - 1.0));
    est.std_error = std::sqrt(var / count);
  }
  return est;
}

double massart_cap(const FiniteHypothesisSample& sample) {
  const Matrix& table = sample.loss_table;
  if (table.rows() == 0) throw ConfigError("massart_cap: empty candidate set");
  const double r = table.rowwise().norm().maxCoeff();
  return r * std::sqrt(2.0 * std::log(static_cast<double>(table.rows()))) /
         static_cast<double>(table.cols());
}

}  // namespace fedmm
