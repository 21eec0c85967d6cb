#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fedmm/genbounds.hpp"

using namespace fedmm;

namespace {

BoundInputs worked() {
  BoundInputs b;
  b.m = 3;
  b.n = 40;
  b.M = {0.5, 1.0, 2.0};
  b.cover_size = 12.0;
  b.delta = 0.05;
  b.epsilon = 0.02;
  b.L_y = 1.5;
  b.rademacher = 0.08;
  return b;
}

double total(const BoundInputs& b, double f = 0.3) { return pointwise_bound(b, f).total; }

}  // namespace

TEST(PointwiseBound, SlackVanishes) {
  BoundInputs b = worked();
  b.M = {0.0, 0.0, 0.0};
  b.rademacher = 0.0;
  b.L_y = 0.0;
  EXPECT_EQ(total(b, 0.42), 0.42);
}

TEST(PointwiseBound, HandArithmetic) {
  BoundInputs b;
  b.m = 1;
  b.n = 100;
  b.M = {1.0};
  b.cover_size = 1.0;
  b.delta = std::exp(-1.0);
  EXPECT_NEAR(total(b, 0.25), 0.25 + 0.070710678118654752, 1e-12);

  // sum M^2 = 5.25, 2 m^2 n = 720, log(12 / 0.05) = log 240
  const BoundBreakdown w = pointwise_bound(worked(), 0.3);
  EXPECT_NEAR(w.concentration, std::sqrt(5.25 / 720.0 * std::log(240.0)), 1e-12);
  EXPECT_NEAR(w.complexity, 0.16, 1e-15);
  EXPECT_NEAR(w.cover, 0.06, 1e-15);
  EXPECT_NEAR(w.total, 0.3 + 0.16 + 0.06 + std::sqrt(5.25 / 720.0 * std::log(240.0)), 1e-12);
}

TEST(PointwiseBound, DoublingNScalesRootTerm) {
  BoundInputs b = worked();
  const double a = pointwise_bound(b, 0.0).concentration;
  b.n *= 2;
  EXPECT_NEAR(pointwise_bound(b, 0.0).concentration, a / std::sqrt(2.0), 1e-15);
}

TEST(PointwiseBound, Validation) {
  BoundInputs b = worked();
  b.M = {1.0};
  EXPECT_THROW(pointwise_bound(b, 0.0), ConfigError);
  b = worked();
  b.delta = 1.0;
  EXPECT_THROW(pointwise_bound(b, 0.0), ConfigError);
  b = worked();
  b.cover_size = 0.5;
  EXPECT_THROW(pointwise_bound(b, 0.0), ConfigError);
  b = worked();
  b.M[1] = -1.0;
  EXPECT_THROW(pointwise_bound(b, 0.0), ConfigError);
}

TEST(Monotone, RandomPerturbationsNeverDecrease) {
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    BoundInputs b;
    b.m = 1 + static_cast<std::size_t>(U(g) * 6);
    b.n = 1 + static_cast<std::size_t>(U(g) * 200);
    b.M.clear();
    for (std::size_t i = 0; i < b.m; ++i) b.M.push_back(U(g) * 3);
    b.cover_size = 1 + U(g) * 100;
    b.delta = 0.01 + 0.9 * U(g);
    b.epsilon = U(g);
    b.L_y = U(g) * 5;
    b.rademacher = U(g);
    const double base = total(b);
    const double bump = 0.01 + U(g);

    BoundInputs c = b;
    c.M[static_cast<std::size_t>(U(g) * b.m) % b.m] += bump;
    EXPECT_GE(total(c), base);
    c = b;
    c.cover_size += bump * 10;
    EXPECT_GE(total(c), base);
    c = b;
    c.L_y += bump;
    EXPECT_GE(total(c), base);
    c = b;
    c.epsilon += bump;
    EXPECT_GE(total(c), base);
    c = b;
    c.delta *= 0.5;
    EXPECT_GE(total(c), base);
    if (b.n > 1) {
      c = b;
      c.n -= 1;
      EXPECT_GE(total(c), base);
    }
    c = b;
    c.rademacher += bump;
    EXPECT_GE(total(c), base);
  }
}

TEST(UniformBound, ReducesToPointwiseForConstantProfiles) {
  const BoundInputs b = worked();
  const std::vector<std::vector<double>> profiles(4, b.M);
  EXPECT_NEAR(uniform_bound(b, profiles, 0.3).total, total(b, 0.3), 1e-15);
}

TEST(UniformBound, TakesWorstProfileAndDominatesG) {
  const BoundInputs b = worked();
  const std::vector<std::vector<double>> profiles = {{0.5, 1.0, 2.0}, {3.0, 0.0, 0.0}};
  const BoundBreakdown c = uniform_bound(b, profiles, 0.3);
  // worst sum of squares is 9
  EXPECT_NEAR(c.concentration, std::sqrt(9.0 / 720.0 * std::log(240.0)), 1e-12);
  EXPECT_NEAR(c.total, uniform_bound(b, 9.0, 0.3).total, 1e-15);
  EXPECT_GE(c.total, 0.3);
  EXPECT_THROW(uniform_bound(b, std::vector<std::vector<double>>{{1.0}}, 0.3), ConfigError);
}

TEST(VcBound, HandArithmetic) {
  // 2 * 5 * 10 / (100 * 100) = 0.01; 1 + log(1000 / 5) = 1 + log 200
  EXPECT_NEAR(vc_rademacher_bound(10, 100, 5, 10.0), std::sqrt(0.01 * (1.0 + std::log(200.0))),
              1e-12);
  EXPECT_NEAR(vc_rademacher_bound(10, 100, 5, 10.0), 0.2509644868611501, 1e-12);
}

TEST(VcBound, FullDimensionCase) {
  // d = mn: log term is exactly 1
  EXPECT_NEAR(vc_rademacher_bound(2, 3, 6, 4.0), std::sqrt(2.0 * 4.0 / 12.0 * 6.0), 1e-14);
}

TEST(VcBound, HomogeneousInM) {
  const std::vector<double> M = {0.3, 1.1, 0.7};
  std::vector<double> M3;
  for (double v : M) M3.push_back(3.0 * v);
  EXPECT_NEAR(vc_rademacher_bound(3, 50, 4, sum_of_squares(M3)),
              3.0 * vc_rademacher_bound(3, 50, 4, sum_of_squares(M)), 1e-14);
  EXPECT_THROW(vc_rademacher_bound(2, 2, 5, 1.0), ConfigError);
}

TEST(AgnosticFl, SubstitutionMatchesFormula) {
  // M_i(y) = m y_i M with y on the simplex
  const std::size_t m = 4;
  const double Mbound = 1.7;
  const std::vector<double> y = {0.1, 0.2, 0.3, 0.4};
  BoundInputs b = worked();
  b.m = m;
  b.M.clear();
  for (double yi : y) b.M.push_back(static_cast<double>(m) * yi * Mbound);
  double sum_y2 = 0.0;
  for (double yi : y) sum_y2 += yi * yi;
  // sum_i (m y_i M)^2 / (2 m^2 n) = M^2 sum_i y_i^2 / (2 n)
  const double want =
      std::sqrt(Mbound * Mbound * sum_y2 / (2.0 * static_cast<double>(b.n)) *
                std::log(b.cover_size / b.delta));
  EXPECT_NEAR(pointwise_bound(b, 0.0).concentration, want, 1e-13);
}

TEST(Rademacher, SingleRowHasZeroMean) {
  Matrix t(1, 30);
  std::mt19937_64 g(3);
  std::normal_distribution<double> N;
  for (int k = 0; k < 30; ++k) t(0, k) = N(g);
  const RademacherEstimate e = estimate_rademacher({t}, 10'000, 4);
  EXPECT_LE(std::abs(e.value), 4.0 * e.std_error);
  EXPECT_EQ(e.draws, 10'000);
}

TEST(Rademacher, SignPairSingleSampleIsExactlyOne) {
  Matrix t(2, 1);
  t << 1.0, -1.0;
  const RademacherEstimate e = estimate_rademacher({t}, 10'000, 5);
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Rademacher, MassartCapAndSignClosedNonnegative) {
  std::mt19937_64 g(6);
  std::normal_distribution<double> N;
  for (int inst = 0; inst < 5; ++inst) {
    Matrix half(3 + inst, 25);
    for (Eigen::Index r = 0; r < half.rows(); ++r)
      for (Eigen::Index c = 0; c < half.cols(); ++c) half(r, c) = N(g);
    Matrix closed(2 * half.rows(), half.cols());
    closed << half, -half;
    const FiniteHypothesisSample s{closed};
    const RademacherEstimate e = estimate_rademacher(s, 10'000, 100 + inst);
    EXPECT_GE(e.value, 0.0);
    EXPECT_LE(e.value, massart_cap(s) + 4.0 * e.std_error);
  }
}

TEST(Rademacher, ParallelMatchesSerialBitwise) {
  Matrix t = Matrix::Random(6, 40);
  const auto a = estimate_rademacher({t}, 5'000, 9, false);
  const auto b = estimate_rademacher({t}, 5'000, 9, true);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Rademacher, Validation) {
  EXPECT_THROW(estimate_rademacher({Matrix(0, 3)}, 10, 1), ConfigError);
  EXPECT_THROW(estimate_rademacher({Matrix::Ones(2, 3)}, 0, 1), ConfigError);
}
