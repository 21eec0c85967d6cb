#pragma once

// Local objective oracles f_i and the federation that averages them.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "fedmm/core.hpp"

namespace fedmm {

/// Oracle for one agent's objective f_i(x, y). Implementations are immutable
/// after construction and safe to evaluate concurrently.
class LocalObjective {
 public:
  virtual ~LocalObjective() = default;

  virtual std::size_t p() const = 0;
  virtual std::size_t q() const = 0;

  virtual double value(const Vector& x, const Vector& y) const = 0;
  /// Writes (grad_x f_i, grad_y f_i) at (x, y) into preallocated outputs.
  virtual void gradient(const Vector& x, const Vector& y, Vector& gx, Vector& gy) const = 0;

  Vector grad_x(const Vector& x, const Vector& y) const;
  Vector grad_y(const Vector& x, const Vector& y) const;
};

/// f(x, y) = 1/2 x'Qx - 1/2 y'Qy + u'x + v'y, so grad_x = Qx + u and grad_y = -Qy + v.
/// Covers both the two-agent scalar instance and the uncoupled quadratic family.
class QuadraticSaddle final : public LocalObjective {
 public:
  QuadraticSaddle(Matrix Q, Vector u, Vector v);

  std::size_t p() const override { return static_cast<std::size_t>(Q_.rows()); }
  std::size_t q() const override { return static_cast<std::size_t>(Q_.rows()); }
  double value(const Vector& x, const Vector& y) const override;
  void gradient(const Vector& x, const Vector& y, Vector& gx, Vector& gy) const override;

  const Matrix& Q() const { return Q_; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }

 private:
  Matrix Q_;
  Vector u_;
  Vector v_;
};

/// One agent's samples for robust linear regression: rows of `a` are a_{i,j}.
struct RlrSamples {
  Matrix a;  // n_i x d
  Vector b;  // n_i
};

/// f_i(x, y) = (1/n_i) sum_j (x'(a_j + y) - b_j)^2 + 1/2 |x|^2.
class RobustRegressionObjective final : public LocalObjective {
 public:
  explicit RobustRegressionObjective(RlrSamples samples);

  std::size_t p() const override { return static_cast<std::size_t>(samples_.a.cols()); }
  std::size_t q() const override { return static_cast<std::size_t>(samples_.a.cols()); }
  double value(const Vector& x, const Vector& y) const override;
  void gradient(const Vector& x, const Vector& y, Vector& gx, Vector& gy) const override;

  const RlrSamples& samples() const { return samples_; }

 private:
  Vector residuals(const Vector& x, const Vector& y) const;

  RlrSamples samples_;
};

enum class ProblemKind { ScalarTwoAgent, UncoupledQuadratic, RobustLinearRegression, Custom };

const char* to_string(ProblemKind kind);

/// m agents sharing dimensions (p, q) plus the product feasible set.
/// f = (1/m) sum_i f_i.
class MinimaxProblem {
 public:
  MinimaxProblem(ProblemKind kind, std::vector<std::shared_ptr<const LocalObjective>> agents,
                 ProductSet sets);

  ProblemKind kind() const { return kind_; }
  std::size_t m() const { return agents_.size(); }
  std::size_t p() const { return p_; }
  std::size_t q() const { return q_; }
  const LocalObjective& agent(std::size_t i) const { return *agents_[i]; }
  const std::vector<std::shared_ptr<const LocalObjective>>& agents() const { return agents_; }
  const ProductSet& sets() const { return sets_; }

  /// Typed access for the quadratic families; nullptr otherwise.
  const QuadraticSaddle* quadratic_agent(std::size_t i) const;
  const RobustRegressionObjective* rlr_agent(std::size_t i) const;

  double value(const Iterate& z) const;
  void check_dims(const Iterate& z) const;

 private:
  ProblemKind kind_;
  std::vector<std::shared_ptr<const LocalObjective>> agents_;
  ProductSet sets_;
  std::size_t p_;
  std::size_t q_;
};

/// f_1 = x^2 - y^2 - (x - y), f_2 = 4x^2 - 4y^2 - 32(x - y); unconstrained.
MinimaxProblem make_scalar_two_agent();

/// Uncoupled quadratic objectives built from Q_i = A_i'A_i and c_i = A_i'b_i:
/// f_i = 1/2 x'Q_i x - 1/2 y'Q_i y + c_i'(2x - y).
MinimaxProblem make_uncoupled_quadratic(std::vector<Matrix> Q, std::vector<Vector> c,
                                        std::optional<ProductSet> sets = std::nullopt);

/// Robust linear regression with x unconstrained and |y| <= y_radius.
MinimaxProblem make_robust_regression(std::vector<RlrSamples> agents, double y_radius = 1.0);

/// Homogeneous federation: m copies of the same objective.
MinimaxProblem make_homogeneous(std::shared_ptr<const LocalObjective> objective, std::size_t m,
                                ProblemKind kind, ProductSet sets);

struct GlobalGradient {
  Vector gx;
  Vector gy;

  double norm() const { return std::sqrt(gx.squaredNorm() + gy.squaredNorm()); }
};

/// Mean of local gradients, accumulated in ascending agent order.
GlobalGradient global_grad(const MinimaxProblem& problem, const Iterate& z);

/// The stacked field F(z) = (grad_x f, -grad_y f), for one agent or (agent unset) the average.
Vector stacked_field(const MinimaxProblem& problem, const Iterate& z,
                     std::optional<std::size_t> agent = std::nullopt);

/// Unique interior stationary point for the quadratic families.
/// Throws UnsupportedProblemError for RLR / custom problems and
/// SingularSystemError when sum_i Q_i cannot be factored.
Iterate closed_form_minimax(const MinimaxProblem& problem);

struct ProblemConstants {
  double mu;
  double L;
};

/// mu = min_i lambda_min(Q_i), L = max_i lambda_max(Q_i) for the quadratic families.
ProblemConstants estimate_constants(const MinimaxProblem& problem);

}  // namespace fedmm
