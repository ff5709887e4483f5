#pragma once

// Metric-measure models: the Poincare disk (curvature -1) and the q-regular
// tree with counting measure. Each model exposes distance, geodesics, ball
// and sphere measures and the lunule measure lambda(B_R(x) \ B_R(o)).

#include "hyperdpp/errors.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <cstddef>
#include <compare>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace hyperdpp {

using complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Poincare disk

/// A point of the open unit disk, kept away from the boundary circle.
class DiskPoint {
 public:
  static constexpr double boundary_eps = 1e-12;

  DiskPoint() = default;
  explicit DiskPoint(complex z) : z_(z) {
    if (!(std::abs(z) < 1.0 - boundary_eps)) {
      std::ostringstream msg;
      msg << "disk point " << z << " is not inside |z| < 1 - " << boundary_eps;
      throw DomainError(msg.str());
    }
  }

  /// Point at hyperbolic distance `radius` from the origin in direction `angle`.
  static DiskPoint polar(double radius, double angle) {
    return DiskPoint(std::polar(std::tanh(0.5 * radius), angle));
  }

  complex z() const { return z_; }
  /// 1 - |z|^2 without cancellation near the boundary.
  double defect() const {
    const double a = std::abs(z_);
    return (1.0 - a) * (1.0 + a);
  }

  friend bool operator==(const DiskPoint&, const DiskPoint&) = default;

 private:
  complex z_{0.0, 0.0};
};

struct PoincareDisk {
  using point_type = DiskPoint;
  static constexpr bool is_discrete = false;

  DiskPoint base_point() const { return DiskPoint{}; }
  /// Exponential growth rate of ball volumes.
  double growth_exponent() const { return 1.0; }
  /// lim lambda(B_R) / e^{alpha R}.
  double growth_limit() const { return std::numbers::pi; }
  std::string name() const { return "disk"; }
};

/// Moebius map sending a to the origin.
inline complex mobius_to_origin(complex a, complex w) {
  return (w - a) / (1.0 - std::conj(a) * w);
}

/// Inverse of mobius_to_origin.
inline complex mobius_from_origin(complex a, complex w) {
  return (w + a) / (1.0 + std::conj(a) * w);
}

/// Hyperbolic distance. arccosh(1 + u) is evaluated as log1p(u + sqrt(u(u+2))),
/// which keeps full relative precision as u -> 0.
inline double dist(const PoincareDisk&, const DiskPoint& x, const DiskPoint& y) {
  const double diff = std::norm(x.z() - y.z());
  if (diff == 0.0) return 0.0;
  const double u = 2.0 * diff / (x.defect() * y.defect());
  return std::log1p(u + std::sqrt(u * (u + 2.0)));
}

/// Point at distance t from x on the geodesic [x, y].
inline DiskPoint geodesic_point(const PoincareDisk& disk, const DiskPoint& x,
                                const DiskPoint& y, double t) {
  const double d = dist(disk, x, y);
  const double slack = 1e-12 * (1.0 + d);
  if (t < -slack || t > d + slack) {
    throw DomainError("geodesic parameter " + std::to_string(t) + " outside [0, " +
                      std::to_string(d) + "]");
  }
  if (t <= 0.0) return x;
  if (t >= d) return y;
  const complex u = mobius_to_origin(x.z(), y.z());
  const complex v = std::tanh(0.5 * t) * (u / std::abs(u));
  return DiskPoint(mobius_from_origin(x.z(), v));
}

inline double ball_volume(const PoincareDisk&, double R) {
  if (R <= 0.0) return 0.0;
  const double s = std::sinh(0.5 * R);
  return 4.0 * std::numbers::pi * s * s;
}

inline double sphere_area(const PoincareDisk&, double r) {
  return r <= 0.0 ? 0.0 : 2.0 * std::numbers::pi * std::sinh(r);
}

namespace detail {

/// Angular measure, seen from a point x with d(o,x) = r, of the circle of
/// radius rho around x lying outside the closed ball B_R(o).
inline double disk_outside_angle(double r, double R, double rho) {
  // cosh d(o,w) = cosh(r - rho) + 2 sinh r sinh rho sin^2(theta/2)
  const double denom = 2.0 * std::sinh(r) * std::sinh(rho);
  if (denom <= 0.0) return std::cosh(r - rho) > std::cosh(R) ? 2.0 * std::numbers::pi : 0.0;
  const double m = (std::cosh(R) - std::cosh(r - rho)) / denom;
  if (m <= 0.0) return 2.0 * std::numbers::pi;
  if (m >= 1.0) return 0.0;
  return 2.0 * std::numbers::pi - 4.0 * std::asin(std::sqrt(m));
}

}  // namespace detail

/// lambda(B_R(x) \ B_R(o)) for any x with d(o, x) = r, integrated in geodesic
/// polar coordinates around x.
inline double lunule_volume(const PoincareDisk& disk, double r, double R,
                            const NumericPolicy& policy = {}) {
  if (r <= 0.0 || R <= 0.0) return 0.0;
  if (r >= 2.0 * R) return ball_volume(disk, R);
  const double lo = std::abs(r - R);
  double full = 0.0;
  if (r > R) full = 2.0 * std::numbers::pi * (std::cosh(r - R) - 1.0);
  auto integrand = [&](double rho) {
    return std::sinh(rho) * detail::disk_outside_angle(r, R, rho);
  };
  const double partial =
      integrate(integrand, lo, R, policy.quad_rel_tol, policy.lunule_abs_tol, policy.max_quad_panels);
  return full + partial;
}

// ---------------------------------------------------------------------------
// q-regular tree

class RegularTree;

/// A vertex of the q-regular tree, addressed by its non-backtracking word
/// from the root. Only RegularTree can create non-root vertices, so a word is
/// always canonical for its tree.
class TreeVertex {
 public:
  TreeVertex() = default;

  std::span<const int> word() const { return word_; }
  std::size_t depth() const { return word_.size(); }
  bool is_root() const { return word_.empty(); }

  friend bool operator==(const TreeVertex&, const TreeVertex&) = default;
  friend auto operator<=>(const TreeVertex& a, const TreeVertex& b) {
    if (a.word_.size() != b.word_.size()) return a.word_.size() <=> b.word_.size();
    return a.word_ <=> b.word_;
  }

  /// Labels joined with '.', the root as "root".
  std::string to_string() const {
    if (word_.empty()) return "root";
    std::string out;
    for (std::size_t i = 0; i < word_.size(); ++i) {
      if (i) out += '.';
      out += std::to_string(word_[i]);
    }
    return out;
  }

 private:
  friend class RegularTree;
  explicit TreeVertex(std::vector<int> word) : word_(std::move(word)) {}
  std::vector<int> word_;
};

class RegularTree {
 public:
  using point_type = TreeVertex;
  static constexpr bool is_discrete = true;

  explicit RegularTree(int q) : q_(q) {
    if (q < 3) {
      throw DomainError("tree degree must be >= 3 (got " + std::to_string(q) +
                        "); q = 2 is the integer line, which has no exponential growth");
    }
  }

  int degree() const { return q_; }
  TreeVertex root() const { return {}; }
  TreeVertex base_point() const { return {}; }
  double growth_exponent() const { return std::log(static_cast<double>(q_ - 1)); }
  double growth_limit() const { return static_cast<double>(q_) / (q_ - 2); }
  std::string name() const { return "tree(q=" + std::to_string(q_) + ")"; }

  /// Validating constructor for vertices.
  TreeVertex vertex(std::vector<int> word) const {
    for (std::size_t i = 0; i < word.size(); ++i) {
      const int limit = i == 0 ? q_ - 1 : q_ - 2;
      if (word[i] < 0 || word[i] > limit) {
        throw DomainError("tree word label " + std::to_string(word[i]) + " at position " +
                          std::to_string(i) + " outside [0, " + std::to_string(limit) + "]");
      }
    }
    return TreeVertex(std::move(word));
  }

  TreeVertex parent(const TreeVertex& v) const {
    if (v.is_root()) throw DomainError("the root has no parent");
    std::vector<int> w(v.word().begin(), v.word().end() - 1);
    return TreeVertex(std::move(w));
  }

  int child_count(const TreeVertex& v) const { return v.is_root() ? q_ : q_ - 1; }

  TreeVertex child(const TreeVertex& v, int label) const {
    if (label < 0 || label >= child_count(v)) throw DomainError("child label out of range");
    std::vector<int> w(v.word().begin(), v.word().end());
    w.push_back(label);
    return TreeVertex(std::move(w));
  }

  std::vector<TreeVertex> neighbors(const TreeVertex& v) const {
    std::vector<TreeVertex> out;
    out.reserve(static_cast<std::size_t>(q_));
    if (!v.is_root()) out.push_back(parent(v));
    for (int b = 0; b < child_count(v); ++b) out.push_back(child(v, b));
    return out;
  }

  /// Prefix of v of the given length (the ancestor at that depth).
  TreeVertex ancestor(const TreeVertex& v, std::size_t depth) const {
    std::vector<int> w(v.word().begin(), v.word().begin() + static_cast<std::ptrdiff_t>(depth));
    return TreeVertex(std::move(w));
  }

  /// All vertices at distance <= radius from center, ordered by distance and
  /// then by word.
  std::vector<TreeVertex> ball(const TreeVertex& center, int radius) const;

  /// Number of vertices on a sphere of radius r.
  double sphere_count(int r) const {
    if (r < 0) return 0.0;
    if (r == 0) return 1.0;
    return q_ * std::pow(static_cast<double>(q_ - 1), r - 1);
  }

  /// log of sphere_count(r), finite where sphere_count overflows.
  double log_sphere_count(int r) const {
    if (r <= 0) return 0.0;
    return std::log(static_cast<double>(q_)) + (r - 1) * std::log(static_cast<double>(q_ - 1));
  }

 private:
  int q_;
};

inline std::size_t common_prefix(const TreeVertex& x, const TreeVertex& y) {
  const auto a = x.word();
  const auto b = y.word();
  std::size_t k = 0;
  while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
  return k;
}

inline double dist(const RegularTree&, const TreeVertex& x, const TreeVertex& y) {
  return static_cast<double>(x.depth() + y.depth() - 2 * common_prefix(x, y));
}

inline int tree_distance(const TreeVertex& x, const TreeVertex& y) {
  return static_cast<int>(x.depth() + y.depth() - 2 * common_prefix(x, y));
}

/// Vertex at (rounded) distance t from x on the path [x, y]. Half-integers
/// round toward x.
inline TreeVertex geodesic_point(const RegularTree& tree, const TreeVertex& x,
                                 const TreeVertex& y, double t) {
  const int d = tree_distance(x, y);
  if (t < -1e-12 || t > d + 1e-12) {
    throw DomainError("geodesic parameter " + std::to_string(t) + " outside [0, " +
                      std::to_string(d) + "]");
  }
  const int k = std::clamp(static_cast<int>(std::ceil(t - 0.5)), 0, d);
  const std::size_t meet = common_prefix(x, y);
  const int up = static_cast<int>(x.depth() - meet);
  if (k <= up) return tree.ancestor(x, x.depth() - static_cast<std::size_t>(k));
  return tree.ancestor(y, meet + static_cast<std::size_t>(k - up));
}

inline std::vector<TreeVertex> RegularTree::ball(const TreeVertex& center, int radius) const {
  std::vector<TreeVertex> out;
  if (radius < 0) return out;
  out.push_back(center);
  // breadth-first, never stepping back to the vertex we came from
  std::vector<std::pair<TreeVertex, TreeVertex>> frontier;  // (vertex, came_from)
  for (auto& n : neighbors(center)) frontier.emplace_back(n, center);
  for (int r = 1; r <= radius; ++r) {
    std::vector<TreeVertex> layer;
    std::vector<std::pair<TreeVertex, TreeVertex>> next;
    for (auto& [v, from] : frontier) {
      layer.push_back(v);
      if (r == radius) continue;
      for (auto& n : neighbors(v)) {
        if (n != from) next.emplace_back(n, v);
      }
    }
    std::sort(layer.begin(), layer.end());
    out.insert(out.end(), layer.begin(), layer.end());
    frontier = std::move(next);
  }
  return out;
}

/// Tree radii are floored to integers.
inline int tree_radius(double R) { return static_cast<int>(std::floor(R + 1e-9)); }

inline double ball_volume(const RegularTree& tree, double R) {
  if (R < 0.0) return 0.0;
  const int n = tree_radius(R);
  const double q = tree.degree();
  return 1.0 + q * (std::pow(q - 1.0, n) - 1.0) / (q - 2.0);
}

inline double sphere_area(const RegularTree& tree, double r) {
  return tree.sphere_count(tree_radius(r));
}

/// Number of vertices whose projection onto a geodesic segment [x, y] of
/// length m is the j-th vertex of the segment, at height h above it. Such a
/// vertex v has d(x, v) = j + h and d(y, v) = m - j + h.
inline double tree_segment_class_count(int q, int m, int j, int h) {
  if (j < 0 || j > m || h < 0) return 0.0;
  if (h == 0) return 1.0;
  int branches;
  if (m == 0) branches = q;
  else if (j == 0 || j == m) branches = q - 1;
  else branches = q - 2;
  return branches * std::pow(q - 1.0, h - 1);
}

/// log of tree_segment_class_count; -inf for empty classes.
inline double log_tree_segment_class_count(int q, int m, int j, int h) {
  if (j < 0 || j > m || h < 0) return -std::numeric_limits<double>::infinity();
  if (h == 0) return 0.0;
  int branches;
  if (m == 0) branches = q;
  else if (j == 0 || j == m) branches = q - 1;
  else branches = q - 2;
  if (branches == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(branches)) + (h - 1) * std::log(q - 1.0);
}

/// Exact count of vertices v with d(v, x) <= R and d(v, o) > R, d(o, x) = r.
inline double lunule_volume(const RegularTree& tree, double r, double R,
                            const NumericPolicy& = {}) {
  const int m = tree_radius(r);
  const int n = tree_radius(R);
  if (m <= 0 || R < 0.0) return 0.0;
  if (m > 2 * n) return ball_volume(tree, n);
  double total = 0.0;
  // o plays the role of the segment start, x the end
  for (int j = 0; j <= m; ++j) {
    for (int h = std::max(0, n + 1 - j); m - j + h <= n; ++h) {
      total += tree_segment_class_count(tree.degree(), m, j, h);
    }
  }
  return total;
}

}  // namespace hyperdpp
