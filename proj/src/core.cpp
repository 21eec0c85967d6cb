#include "fedmm/core.hpp"

#include <cmath>
#include <limits>

namespace fedmm {

Vector Iterate::stacked() const {
  Vector out(x.size() + y.size());
  out << x, y;
  return out;
}

bool Iterate::operator==(const Iterate& other) const {
  return x.size() == other.x.size() && y.size() == other.y.size() && x == other.x &&
         y == other.y;
}

double squared_norm(const Iterate& z) { return z.x.squaredNorm() + z.y.squaredNorm(); }

void require_dim(const char* what, std::size_t expected, std::size_t actual) {
  if (expected != actual) throw DimensionError(what, expected, actual);
}

FeasibleSet FeasibleSet::unconstrained(std::size_t dim) {
  return FeasibleSet(Kind::Unconstrained, dim, Vector(), std::numeric_limits<double>::infinity());
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ConfigError("ball radius must be positive and finite");
  if (!center.allFinite()) throw ConfigError("ball center must be finite");
  const auto dim = static_cast<std::size_t>(center.size());
  return FeasibleSet(Kind::Ball, dim, std::move(center), radius);
}

FeasibleSet FeasibleSet::ball(std::size_t dim, double radius) {
  return ball(Vector::Zero(static_cast<Eigen::Index>(dim)), radius);
}

bool FeasibleSet::contains(const Vector& v, double tol) const {
  require_dim("FeasibleSet::contains", dim_, static_cast<std::size_t>(v.size()));
  if (kind_ == Kind::Unconstrained) return true;
  return (v - center_).norm() <= radius_ + tol;
}

Vector project(const FeasibleSet& set, const Vector& v) {
  require_dim("project", set.dim(), static_cast<std::size_t>(v.size()));
  if (set.kind() == FeasibleSet::Kind::Unconstrained) return v;
  const Vector offset = v - set.center();
  const double dist = offset.norm();
  if (dist <= set.radius()) return v;
  return set.center() + (offset / dist) * set.radius();
}

Iterate project(const ProductSet& sets, const Iterate& z) {
  return {project(sets.set_x, z.x), project(sets.set_y, z.y)};
}

Vector add(const Vector& a, const Vector& b) {
  require_dim("add", static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
  return a + b;
}

Vector sub(const Vector& a, const Vector& b) {
  require_dim("sub", static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
  return a - b;
}

Vector scale(double s, const Vector& a) { return s * a; }

double dot(const Vector& a, const Vector& b) {
  require_dim("dot", static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
  return a.dot(b);
}

double norm2(const Vector& a) { return a.squaredNorm(); }

Vector mean_ascending(std::span<const Vector> values) {
  if (values.empty()) throw ConfigError("mean of an empty set of vectors");
  const Vector& first = values.front();
  Vector acc = Vector::Zero(first.size());
  for (std::size_t i = 1; i < values.size(); ++i) {
    require_dim("mean_ascending", static_cast<std::size_t>(first.size()),
                static_cast<std::size_t>(values[i].size()));
    acc += values[i] - first;
  }
  return first + acc / static_cast<double>(values.size());
}

}  // namespace fedmm
