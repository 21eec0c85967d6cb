#include "fedmm/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>

namespace fedmm {

Vector LocalObjective::grad_x(const Vector& x, const Vector& y) const {
  Vector gx(static_cast<Eigen::Index>(p())), gy(static_cast<Eigen::Index>(q()));
  gradient(x, y, gx, gy);
  return gx;
}

Vector LocalObjective::grad_y(const Vector& x, const Vector& y) const {
  Vector gx(static_cast<Eigen::Index>(p())), gy(static_cast<Eigen::Index>(q()));
  gradient(x, y, gx, gy);
  return gy;
}

// --- QuadraticSaddle ---------------------------------------------------------

QuadraticSaddle::QuadraticSaddle(Matrix Q, Vector u, Vector v)
    : Q_(std::move(Q)), u_(std::move(u)), v_(std::move(v)) {
  if (Q_.rows() != Q_.cols())
    throw DimensionError("QuadraticSaddle: Q must be square", static_cast<std::size_t>(Q_.rows()),
                         static_cast<std::size_t>(Q_.cols()));
  require_dim("QuadraticSaddle: u", static_cast<std::size_t>(Q_.rows()),
              static_cast<std::size_t>(u_.size()));
  require_dim("QuadraticSaddle: v", static_cast<std::size_t>(Q_.rows()),
              static_cast<std::size_t>(v_.size()));
  if (!Q_.allFinite() || !u_.allFinite() || !v_.allFinite())
    throw ConfigError("QuadraticSaddle: non-finite coefficients");
  if (!Q_.isApprox(Q_.transpose(), 1e-12))
    throw ConfigError("QuadraticSaddle: Q must be symmetric");
}

double QuadraticSaddle::value(const Vector& x, const Vector& y) const {
  return 0.5 * x.dot(Q_ * x) - 0.5 * y.dot(Q_ * y) + u_.dot(x) + v_.dot(y);
}

void QuadraticSaddle::gradient(const Vector& x, const Vector& y, Vector& gx, Vector& gy) const {
  gx.noalias() = Q_ * x;
  gx += u_;
  gy.noalias() = -(Q_ * y);
  gy += v_;
}

// --- RobustRegressionObjective ----------------------------------------------

RobustRegressionObjective::RobustRegressionObjective(RlrSamples samples)
    : samples_(std::move(samples)) {
  if (samples_.a.rows() == 0 || samples_.a.cols() == 0)
    throw ConfigError("RobustRegressionObjective: need at least one sample and one feature");
  require_dim("RobustRegressionObjective: b", static_cast<std::size_t>(samples_.a.rows()),
              static_cast<std::size_t>(samples_.b.size()));
}

Vector RobustRegressionObjective::residuals(const Vector& x, const Vector& y) const {
  Vector r = samples_.a * x;
  r.array() += x.dot(y);
  r -= samples_.b;
  return r;
}

double RobustRegressionObjective::value(const Vector& x, const Vector& y) const {
  const Vector r = residuals(x, y);
  return r.squaredNorm() / static_cast<double>(r.size()) + 0.5 * x.squaredNorm();
}

void RobustRegressionObjective::gradient(const Vector& x, const Vector& y, Vector& gx,
                                         Vector& gy) const {
  const Vector r = residuals(x, y);
  const double w = 2.0 / static_cast<double>(r.size());
  const double rsum = r.sum();
  gx.noalias() = samples_.a.transpose() * r;
  gx += rsum * y;
  gx *= w;
  gx += x;
  gy = (w * rsum) * x;
}

// --- MinimaxProblem ----------------------------------------------------------

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::ScalarTwoAgent:
      return "scalar2";
    case ProblemKind::UncoupledQuadratic:
      return "quadratic";
    case ProblemKind::RobustLinearRegression:
      return "rlr";
    case ProblemKind::Custom:
      return "custom";
  }
  return "unknown";
}

MinimaxProblem::MinimaxProblem(ProblemKind kind,
                               std::vector<std::shared_ptr<const LocalObjective>> agents,
                               ProductSet sets)
    : kind_(kind), agents_(std::move(agents)), sets_(std::move(sets)) {
  if (agents_.empty()) throw ConfigError("MinimaxProblem needs at least one agent");
  p_ = agents_.front()->p();
  q_ = agents_.front()->q();
  if (p_ == 0 || q_ == 0) throw ConfigError("MinimaxProblem: p and q must be positive");
  for (const auto& a : agents_) {
    require_dim("MinimaxProblem: agent p", p_, a->p());
    require_dim("MinimaxProblem: agent q", q_, a->q());
  }
  require_dim("MinimaxProblem: set_x", p_, sets_.set_x.dim());
  require_dim("MinimaxProblem: set_y", q_, sets_.set_y.dim());
}

const QuadraticSaddle* MinimaxProblem::quadratic_agent(std::size_t i) const {
  return dynamic_cast<const QuadraticSaddle*>(agents_.at(i).get());
}

const RobustRegressionObjective* MinimaxProblem::rlr_agent(std::size_t i) const {
  return dynamic_cast<const RobustRegressionObjective*>(agents_.at(i).get());
}

void MinimaxProblem::check_dims(const Iterate& z) const {
  require_dim("iterate x", p_, z.p());
  require_dim("iterate y", q_, z.q());
}

double MinimaxProblem::value(const Iterate& z) const {
  check_dims(z);
  const double first = agents_.front()->value(z.x, z.y);
  double acc = 0.0;
  for (std::size_t i = 1; i < agents_.size(); ++i) acc += agents_[i]->value(z.x, z.y) - first;
  return first + acc / static_cast<double>(agents_.size());
}

MinimaxProblem make_scalar_two_agent() {
  std::vector<std::shared_ptr<const LocalObjective>> agents;
  for (int i = 1; i <= 2; ++i) {
    const double curvature = 2.0 * i * i;
    const double shift = 31.0 * i - 30.0;
    agents.push_back(std::make_shared<QuadraticSaddle>(Matrix::Constant(1, 1, curvature),
                                                       Vector::Constant(1, -shift),
                                                       Vector::Constant(1, shift)));
  }
  return MinimaxProblem(ProblemKind::ScalarTwoAgent, std::move(agents),
                        ProductSet::unconstrained(1, 1));
}

MinimaxProblem make_uncoupled_quadratic(std::vector<Matrix> Q, std::vector<Vector> c,
                                        std::optional<ProductSet> sets) {
  if (Q.size() != c.size())
    throw DimensionError("make_uncoupled_quadratic: agent count", Q.size(), c.size());
  if (Q.empty()) throw ConfigError("make_uncoupled_quadratic: no agents");
  const auto d = static_cast<std::size_t>(Q.front().rows());
  std::vector<std::shared_ptr<const LocalObjective>> agents;
  agents.reserve(Q.size());
  for (std::size_t i = 0; i < Q.size(); ++i) {
    Vector u = 2.0 * c[i];
    Vector v = -c[i];
    agents.push_back(std::make_shared<QuadraticSaddle>(std::move(Q[i]), std::move(u), std::move(v)));
  }
  MinimaxProblem problem(ProblemKind::UncoupledQuadratic, std::move(agents),
                         sets ? std::move(*sets) : ProductSet::unconstrained(d, d));
  // Rejects instances whose aggregate curvature is not positive definite.
  (void)closed_form_minimax(problem);
  return problem;
}

MinimaxProblem make_robust_regression(std::vector<RlrSamples> agents, double y_radius) {
  if (agents.empty()) throw ConfigError("make_robust_regression: no agents");
  const auto d = static_cast<std::size_t>(agents.front().a.cols());
  std::vector<std::shared_ptr<const LocalObjective>> objectives;
  objectives.reserve(agents.size());
  for (auto& s : agents)
    objectives.push_back(std::make_shared<RobustRegressionObjective>(std::move(s)));
  return MinimaxProblem(ProblemKind::RobustLinearRegression, std::move(objectives),
                        {FeasibleSet::unconstrained(d), FeasibleSet::ball(d, y_radius)});
}

MinimaxProblem make_homogeneous(std::shared_ptr<const LocalObjective> objective, std::size_t m,
                                ProblemKind kind, ProductSet sets) {
  std::vector<std::shared_ptr<const LocalObjective>> agents(m, objective);
  return MinimaxProblem(kind, std::move(agents), std::move(sets));
}

// --- global quantities -------------------------------------------------------

GlobalGradient global_grad(const MinimaxProblem& problem, const Iterate& z) {
  problem.check_dims(z);
  const std::size_t m = problem.m();
  std::vector<Vector> gx(m, Vector(static_cast<Eigen::Index>(problem.p())));
  std::vector<Vector> gy(m, Vector(static_cast<Eigen::Index>(problem.q())));
  for (std::size_t i = 0; i < m; ++i) problem.agent(i).gradient(z.x, z.y, gx[i], gy[i]);
  return {mean_ascending(gx), mean_ascending(gy)};
}

Vector stacked_field(const MinimaxProblem& problem, const Iterate& z,
                     std::optional<std::size_t> agent) {
  problem.check_dims(z);
  Vector gx(static_cast<Eigen::Index>(problem.p())), gy(static_cast<Eigen::Index>(problem.q()));
  if (agent) {
    problem.agent(*agent).gradient(z.x, z.y, gx, gy);
  } else {
    auto g = global_grad(problem, z);
    gx = std::move(g.gx);
    gy = std::move(g.gy);
  }
  Vector out(gx.size() + gy.size());
  out << gx, -gy;
  return out;
}

namespace {

std::vector<const QuadraticSaddle*> quadratic_agents(const MinimaxProblem& problem,
                                                     const char* op) {
  if (problem.kind() != ProblemKind::ScalarTwoAgent &&
      problem.kind() != ProblemKind::UncoupledQuadratic)
    throw UnsupportedProblemError(std::string(op) + ": no closed form for problem kind '" +
                                  to_string(problem.kind()) + "'");
  std::vector<const QuadraticSaddle*> out;
  for (std::size_t i = 0; i < problem.m(); ++i) {
    const auto* q = problem.quadratic_agent(i);
    if (q == nullptr) throw UnsupportedProblemError(std::string(op) + ": non-quadratic agent");
    out.push_back(q);
  }
  return out;
}

}  // namespace

Iterate closed_form_minimax(const MinimaxProblem& problem) {
  const auto agents = quadratic_agents(problem, "closed_form_minimax");
  const auto d = static_cast<Eigen::Index>(problem.p());
  Matrix Q_sum = Matrix::Zero(d, d);
  Vector u_sum = Vector::Zero(d);
  Vector v_sum = Vector::Zero(d);
  for (const auto* a : agents) {
    Q_sum += a->Q();
    u_sum += a->u();
    v_sum += a->v();
  }
  Eigen::LLT<Matrix> llt(Q_sum);
  if (llt.info() != Eigen::Success)
    throw SingularSystemError("closed_form_minimax: sum of curvature matrices is not positive definite");
  // grad_x f = 0  <=>  (sum Q) x = -sum u ;  grad_y f = 0  <=>  (sum Q) y = sum v
  Vector x = llt.solve(-u_sum);
  Vector y = llt.solve(v_sum);
  const double rx = (Q_sum * x + u_sum).norm() / (1.0 + u_sum.norm());
  const double ry = (Q_sum * y - v_sum).norm() / (1.0 + v_sum.norm());
  if (!x.allFinite() || !y.allFinite() || rx > 1e-6 || ry > 1e-6)
    throw SingularSystemError("closed_form_minimax: solve residual too large (system is singular)");
  return {std::move(x), std::move(y)};
}

ProblemConstants estimate_constants(const MinimaxProblem& problem) {
  const auto agents = quadratic_agents(problem, "estimate_constants");
  double mu = std::numeric_limits<double>::infinity();
  double L = 0.0;
  for (const auto* a : agents) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a->Q(), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
      throw SingularSystemError("estimate_constants: eigensolver failed");
    mu = std::min(mu, eig.eigenvalues().minCoeff());
    L = std::max(L, eig.eigenvalues().maxCoeff());
  }
  return {mu, L};
}

}  // namespace fedmm
