#include <gtest/gtest.h>

#include <cmath>

#include "fedmm/algorithms.hpp"
#include "fedmm/analysis.hpp"
#include "fedmm/datagen.hpp"

using namespace fedmm;

namespace {

Iterate scalar(double x, double y) { return {Vector::Constant(1, x), Vector::Constant(1, y)}; }

MetricOptions quiet() {
  MetricOptions m;
  m.timing = false;
  return m;
}

// Plain re-implementation of one Local SGDA round: separate from the library's
// round driver, used as an oracle.
Iterate local_sgda_round_oracle(const MinimaxProblem& p, const Iterate& z, int K, double ex,
                                double ey) {
  Vector sx = Vector::Zero(z.x.size()), sy = Vector::Zero(z.y.size());
  for (std::size_t i = 0; i < p.m(); ++i) {
    Vector x = z.x, y = z.y;
    for (int k = 0; k < K; ++k) {
      const Vector gx = p.agent(i).grad_x(x, y);
      const Vector gy = p.agent(i).grad_y(x, y);
      x -= ex * gx;
      y += ey * gy;
    }
    sx += x;
    sy += y;
  }
  return {sx / static_cast<double>(p.m()), sy / static_cast<double>(p.m())};
}

}  // namespace

TEST(GdaStep, StationaryPointFixed) {
  const auto p = make_scalar_two_agent();
  for (double eta : {0.001, 0.1, 0.2}) {
    const Iterate z = gda_step(p, scalar(3.3, 3.3), eta, eta);
    EXPECT_NEAR(z.x(0), 3.3, 1e-15);
    EXPECT_NEAR(z.y(0), 3.3, 1e-15);
  }
}

TEST(GdaStep, HandStepFromOrigin) {
  const Iterate z = gda_step(make_scalar_two_agent(), scalar(0, 0), 0.1, 0.1);
  EXPECT_DOUBLE_EQ(z.x(0), 1.65);
  EXPECT_DOUBLE_EQ(z.y(0), 1.65);
}

TEST(GdaStep, ZeroStepIsIdentity) {
  const Iterate z0 = scalar(1.25, -4.0);
  EXPECT_EQ(gda_step(make_scalar_two_agent(), z0, 0.0, 0.0), z0);
}

TEST(GdaStep, ProjectsOntoBall) {
  const auto p = gen_rlr({2, 3, 10, 1.0, 1});
  Iterate z = Iterate::zeros(3, 3);
  z.x.setConstant(2.0);
  for (int t = 0; t < 20; ++t) {
    z = gda_step(p, z, 1e-2, 1.0);
    EXPECT_LE(z.y.norm(), 1.0 + 1e-12);
  }
}

TEST(AlgoConfig, Validation) {
  EXPECT_THROW(AlgoConfig::fedgda_gt(0.0, 1, 10).validate(), ConfigError);
  EXPECT_THROW(AlgoConfig::local_sgda(0.1, 0.1, 0, 10).validate(), ConfigError);
  EXPECT_THROW(AlgoConfig::local_sgda(0.1, 0.1, 1, -1).validate(), ConfigError);
  AlgoConfig g = AlgoConfig::gda(0.1, 0.1, 3);
  g.K = 2;
  EXPECT_THROW(g.validate(), ConfigError);
  AlgoConfig f = AlgoConfig::fedgda_gt(0.1, 2, 3);
  f.eta_y = 0.2;
  EXPECT_THROW(f.validate(), ConfigError);
  EXPECT_EQ(parse_algorithm("FedGDAGT"), Algorithm::FedGDAGT);
  EXPECT_FALSE(parse_algorithm("fedgda").has_value());
}

TEST(RunTrace, RoundZeroOnly) {
  const auto p = make_scalar_two_agent();
  const RunTrace t = local_sgda(p, AlgoConfig::local_sgda(0.1, 0.1, 3, 0), quiet());
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].round, 0);
  EXPECT_EQ(t.final_iterate, Iterate::zeros(1, 1));
}

TEST(RunTrace, MetricsPopulated) {
  const auto p = make_scalar_two_agent();
  MetricOptions m;
  m.z_star = closed_form_minimax(p);
  const RunTrace t = fedgda_gt(p, AlgoConfig::fedgda_gt(0.05, 2, 5), m);
  ASSERT_EQ(t.records.size(), 6u);
  for (const auto& r : t.records) {
    EXPECT_TRUE(r.gap_sq.has_value());
    EXPECT_TRUE(r.elapsed_ns.has_value());
    EXPECT_FALSE(r.robust_loss.has_value());
  }
  EXPECT_DOUBLE_EQ(*t.records[0].gap_sq, 2 * 3.3 * 3.3);
}

TEST(LocalSgda, KOneMatchesGdaBitwiseForSingleAgent) {
  const auto src = gen_quadratic({3, 5, 20, 2});
  const auto p = make_homogeneous(src.agents()[1], 1, ProblemKind::UncoupledQuadratic, src.sets());
  const RunTrace ls = local_sgda(p, AlgoConfig::local_sgda(1e-3, 2e-3, 1, 50), quiet());
  const RunTrace gd = run_gda(p, AlgoConfig::gda(1e-3, 2e-3, 50), quiet());
  for (std::size_t t = 0; t < ls.records.size(); ++t) EXPECT_EQ(ls.records[t].z, gd.records[t].z);
}

TEST(LocalSgda, KOneMatchesGdaHeterogeneous) {
  // averaging agent steps rounds differently from stepping along the averaged gradient
  const auto p = gen_quadratic({4, 5, 20, 2});
  const RunTrace ls = local_sgda(p, AlgoConfig::local_sgda(1e-3, 1e-3, 1, 50), quiet());
  const RunTrace gd = run_gda(p, AlgoConfig::gda(1e-3, 1e-3, 50), quiet());
  for (std::size_t t = 0; t < ls.records.size(); ++t) {
    const Iterate& a = ls.records[t].z;
    const Iterate& b = gd.records[t].z;
    EXPECT_LE(std::sqrt(squared_norm(Iterate{a.x - b.x, a.y - b.y})),
              1e-12 * (1 + std::sqrt(squared_norm(b))));
  }
}

TEST(LocalSgda, MatchesRoundOracle) {
  const auto p = gen_quadratic({3, 4, 12, 5});
  const RunTrace t = local_sgda(p, AlgoConfig::local_sgda(1e-3, 2e-3, 4, 10), quiet());
  Iterate z = Iterate::zeros(4, 4);
  for (int r = 1; r <= 10; ++r) {
    z = local_sgda_round_oracle(p, z, 4, 1e-3, 2e-3);
    const Iterate& got = t.records[static_cast<std::size_t>(r)].z;
    EXPECT_LE((got.stacked() - z.stacked()).norm(), 1e-12 * (1 + z.stacked().norm()));
  }
}

TEST(LocalSgda, ConvergesToClosedFormFixedPoint) {
  AlgoConfig c = AlgoConfig::local_sgda(1e-3, 1e-3, 10, 1'000'000);
  c.stop.step_tol = 1e-15;
  const RunTrace t = local_sgda(make_scalar_two_agent(), c, quiet());
  const Iterate fp = local_sgda_fixed_point_closed_form(10, 1e-3, 1e-3);
  EXPECT_NEAR(t.final_iterate.x(0), fp.x(0), 1e-8);
  EXPECT_NEAR(t.final_iterate.y(0), fp.y(0), 1e-8);
  EXPECT_GT(std::abs(fp.x(0) - 3.3), 1e-3);
}

TEST(LocalSgda, HomogeneousAgentsStayEqual) {
  const auto src = make_scalar_two_agent();
  const auto p = make_homogeneous(src.agents()[0], 5, ProblemKind::Custom, src.sets());
  const RunTrace t = local_sgda(p, AlgoConfig::local_sgda(0.01, 0.01, 7, 30), quiet());
  Iterate z = Iterate::zeros(1, 1);
  for (int r = 0; r < 30; ++r) z = operator_compose(p, 0, 7, 0.01, 0.01, z);
  EXPECT_EQ(t.final_iterate, z);
}

TEST(FedGdaGt, StartAtMinimaxStays) {
  const auto p = gen_quadratic({5, 6, 30, 3});
  AlgoConfig c = AlgoConfig::fedgda_gt(1e-3, 5, 50);
  c.init = closed_form_minimax(p);
  const RunTrace t = fedgda_gt(p, c, quiet());
  EXPECT_LE((t.final_iterate.stacked() - c.init->stacked()).norm(), 1e-9);
}

TEST(FedGdaGt, HomogeneousEqualsCentralizedGdaBitwise) {
  const auto src = gen_quadratic({3, 6, 30, 4});
  const auto p = make_homogeneous(src.agents()[0], 4, ProblemKind::UncoupledQuadratic, src.sets());
  for (int K : {1, 5, 10}) {
    const RunTrace f = fedgda_gt(p, AlgoConfig::fedgda_gt(1e-3, K, 40), quiet());
    const RunTrace g = run_gda(p, AlgoConfig::gda(1e-3, 1e-3, 40L * K), quiet());
    for (std::size_t t = 0; t <= 40; ++t) ASSERT_EQ(f.records[t].z, g.records[t * K].z) << K;
  }
}

TEST(FedGdaGt, GeometricDecayWithAutoStepsize) {
  const auto p = gen_quadratic({6, 8, 40, 2});
  const int K = 5;
  MetricOptions m = quiet();
  m.z_star = closed_form_minimax(p);
  AlgoConfig c = AlgoConfig::fedgda_gt(auto_stepsize(p, K), K, 200'000);
  c.stop.gap_tol = 1e-8;
  const RunTrace t = fedgda_gt(p, c, m);
  std::vector<double> gaps;
  for (const auto& r : t.records) gaps.push_back(*r.gap_sq);
  EXPECT_LE(gaps.back(), 1e-8);
  const DecayFit fit = fit_decay_ratio(gaps);
  EXPECT_LT(fit.rho_hat, 1.0);
  EXPECT_LE(fit.max_ratio, fit.rho_hat + 1e-3);
}

TEST(FedGdaGt, BeatsLocalSgdaOnScalarInstance) {
  const auto p = make_scalar_two_agent();
  MetricOptions m = quiet();
  m.z_star = closed_form_minimax(p);
  const double gt = *fedgda_gt(p, AlgoConfig::fedgda_gt(0.01, 10, 2000), m).records.back().gap_sq;
  const double ls =
      *local_sgda(p, AlgoConfig::local_sgda(0.01, 0.01, 10, 2000), m).records.back().gap_sq;
  EXPECT_LE(gt, 1e-20);
  EXPECT_GE(ls, 1e-3);
}

TEST(OperatorCompose, IdentityAndOneStep) {
  const auto p = gen_quadratic({2, 3, 9, 1});
  const Iterate z{Vector::Constant(3, 0.5), Vector::Constant(3, -0.25)};
  EXPECT_EQ(operator_compose(p, 1, 0, 0.01, 0.02, z), z);
  const Iterate one = operator_compose(p, 1, 1, 0.01, 0.02, z);
  const Vector gx = p.agent(1).grad_x(z.x, z.y);
  const Vector gy = p.agent(1).grad_y(z.x, z.y);
  EXPECT_EQ(one.x, z.x - 0.01 * gx);
  EXPECT_EQ(one.y, z.y + 0.02 * gy);
}

TEST(OperatorCompose, CompositionLawBitwise) {
  const auto p = gen_rlr({2, 3, 9, 5.0, 1});
  const Iterate z{Vector::Constant(3, 0.3), Vector::Constant(3, 0.1)};
  for (int k1 : {0, 1, 3})
    for (int k2 : {0, 2, 5}) {
      const Iterate a = operator_compose(p, 0, k1 + k2, 1e-3, 1e-3, z);
      const Iterate b =
          operator_compose(p, 0, k2, 1e-3, 1e-3, operator_compose(p, 0, k1, 1e-3, 1e-3, z));
      EXPECT_EQ(a, b);
    }
}

TEST(Residual, KOneAtMinimaxIsZero) {
  const auto p = gen_quadratic({3, 4, 12, 8});
  EXPECT_LE(local_sgda_residual(p, closed_form_minimax(p), 1, 1e-3, 1e-3).norm(), 1e-12);
}

TEST(Residual, KTwoAtScalarMinimaxIsNonzero) {
  // direct evaluation: agent i moves x by -eta * grad at step 0, then grad changes by 2 i^2 dx
  const auto p = make_scalar_two_agent();
  const Vector r = local_sgda_residual(p, scalar(3.3, 3.3), 2, 1e-3, 1e-3);
  double ex = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const double g0 = 2.0 * i * i * 3.3 - (31.0 * i - 30.0);
    const double x1 = 3.3 - 1e-3 * g0;
    ex += g0 + (2.0 * i * i * x1 - (31.0 * i - 30.0));
  }
  ex /= 2.0;
  EXPECT_NEAR(r(0), ex, 1e-12);
  EXPECT_GT(r.norm(), 1e-3);
}

TEST(Divergence, GuardAbortsUnstableStepsize) {
  const auto p = make_scalar_two_agent();
  try {
    run_gda(p, AlgoConfig::gda(10.0, 10.0, 1000), quiet());
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.round(), 0);
  }
}

TEST(Parallel, SerialAndParallelBitwise) {
  const auto p = gen_quadratic({7, 6, 30, 3});
  for (Algorithm a : {Algorithm::LocalSGDA, Algorithm::FedGDAGT, Algorithm::GDA}) {
    AlgoConfig c;
    c.algo = a;
    c.eta_x = c.eta_y = 1e-3;
    c.K = a == Algorithm::GDA ? 1 : 6;
    c.rounds = 40;
    const RunTrace s = run(p, c, quiet());
    c.exec = Execution::Parallel;
    const RunTrace q = run(p, c, quiet());
    ASSERT_EQ(s.records.size(), q.records.size());
    for (std::size_t t = 0; t < s.records.size(); ++t) {
      EXPECT_EQ(s.records[t].z, q.records[t].z);
      EXPECT_EQ(s.records[t].grad_norm, q.records[t].grad_norm);
    }
  }
}

TEST(AutoStepsize, Formula) {
  const ProblemConstants c{2.0, 8.0};
  EXPECT_DOUBLE_EQ(auto_stepsize(c, 1), 0.5 * std::min(4.0 / 64.0, 1.0 / 4.0));
  EXPECT_DOUBLE_EQ(auto_stepsize(c, 10), 0.5 * std::min(4.0 / 64.0, 1.0 / 40.0));
}
