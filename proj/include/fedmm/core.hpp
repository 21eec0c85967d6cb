#pragma once

// Dense vectors, the (x, y) iterate, and the feasible sets the server projects onto.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "fedmm/errors.hpp"

namespace fedmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The concatenated decision pair z = (x, y): x for the min player, y for the max player.
struct Iterate {
  Vector x;
  Vector y;

  Iterate() = default;
  Iterate(Vector x_, Vector y_) : x(std::move(x_)), y(std::move(y_)) {}

  static Iterate zeros(std::size_t p, std::size_t q) {
    return {Vector::Zero(static_cast<Eigen::Index>(p)), Vector::Zero(static_cast<Eigen::Index>(q))};
  }

  std::size_t p() const { return static_cast<std::size_t>(x.size()); }
  std::size_t q() const { return static_cast<std::size_t>(y.size()); }

  /// Stacked copy [x; y].
  Vector stacked() const;
  bool all_finite() const { return x.allFinite() && y.allFinite(); }

  bool operator==(const Iterate& other) const;
};

/// Squared Euclidean norm of the stacked iterate.
double squared_norm(const Iterate& z);

class FeasibleSet {
 public:
  enum class Kind { Unconstrained, Ball };

  static FeasibleSet unconstrained(std::size_t dim);
  /// Ball of the given radius around `center`; radius must be positive and finite.
  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet ball(std::size_t dim, double radius);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(const Vector& v, double tol = 1e-12) const;

 private:
  FeasibleSet(Kind kind, std::size_t dim, Vector center, double radius)
      : kind_(kind), dim_(dim), center_(std::move(center)), radius_(radius) {}

  Kind kind_;
  std::size_t dim_;
  Vector center_;
  double radius_;
};

struct ProductSet {
  FeasibleSet set_x;
  FeasibleSet set_y;

  static ProductSet unconstrained(std::size_t p, std::size_t q) {
    return {FeasibleSet::unconstrained(p), FeasibleSet::unconstrained(q)};
  }
};

/// Euclidean projection. Identity for Unconstrained; radial scaling toward the
/// center for points outside a ball.
Vector project(const FeasibleSet& set, const Vector& v);
Iterate project(const ProductSet& sets, const Iterate& z);

// Dimension-checked arithmetic. All throw DimensionError on mismatch.
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(double s, const Vector& a);
double dot(const Vector& a, const Vector& b);
/// Squared Euclidean norm.
double norm2(const Vector& a);

void require_dim(const char* what, std::size_t expected, std::size_t actual);

/// Arithmetic mean accumulated in ascending index order as
/// v[0] + (sum_{i>0} (v[i] - v[0])) / n. Averaging identical vectors
/// returns them bitwise, which the homogeneous-agent equivalence relies on.
Vector mean_ascending(std::span<const Vector> values);

}  // namespace fedmm
