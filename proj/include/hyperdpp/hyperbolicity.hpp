#pragma once

// Empirical probes of Gromov hyperbolicity: a sampled lower estimate of the
// thin-triangle constant delta, and a Monte Carlo (or, on trees, exhaustive)
// check that B(x,R) & B(y,R) lies in B(p, R - r/2 + 2 delta) around the
// midpoint p of [x, y].

#include "hyperdpp/parallel.hpp"
#include "hyperdpp/space.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace hyperdpp {

struct ContainmentReport {
  std::int64_t trials = 0;      // trials where a point of the intersection was found
  std::int64_t violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// random points

/// Uniform (w.r.t. hyperbolic area) point of the ball B_R(center).
template <class Rng>
DiskPoint random_disk_point(const DiskPoint& center, double R, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const double r = std::acosh(1.0 + u * (std::cosh(R) - 1.0));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return DiskPoint(mobius_from_origin(center.z(), std::polar(std::tanh(0.5 * r), theta)));
}

/// Point at distance exactly r from center in a uniformly random direction.
template <class Rng>
DiskPoint random_disk_point_at(const DiskPoint& center, double r, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return DiskPoint(mobius_from_origin(center.z(), std::polar(std::tanh(0.5 * r), theta)));
}

/// Endpoint of a uniformly random non-backtracking walk of length r from v,
/// i.e. a uniform vertex of the sphere of radius r around v.
template <class Rng>
TreeVertex random_tree_vertex_at(const RegularTree& tree, const TreeVertex& v, int r, Rng& rng) {
  TreeVertex current = v;
  TreeVertex previous = v;
  for (int step = 0; step < r; ++step) {
    std::vector<TreeVertex> options;
    for (auto& n : tree.neighbors(current)) {
      if (step == 0 || n != previous) options.push_back(std::move(n));
    }
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    previous = current;
    current = options[pick(rng)];
  }
  return current;
}

/// Uniform vertex of the closed ball B_R(center).
template <class Rng>
TreeVertex random_tree_vertex(const RegularTree& tree, const TreeVertex& center, int R, Rng& rng) {
  std::vector<double> shells;
  for (int r = 0; r <= R; ++r) shells.push_back(tree.sphere_count(r));
  std::discrete_distribution<int> radius(shells.begin(), shells.end());
  return random_tree_vertex_at(tree, center, radius(rng), rng);
}

// ---------------------------------------------------------------------------
// delta estimate

namespace detail {

using Lorentz = std::array<double, 3>;

inline double minkowski(const Lorentz& u, const Lorentz& v) {
  return -u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

inline Lorentz hyperboloid(const DiskPoint& p) {
  const double d = p.defect();
  const complex z = p.z();
  return {(2.0 - d) / d, 2.0 * z.real() / d, 2.0 * z.imag() / d};
}

/// Geodesic segment on the hyperboloid with an orthonormal frame
/// (start, unit tangent, unit normal).
struct Segment {
  Lorentz start{}, tangent{}, normal{};
  double length = 0.0;

  Segment(const Lorentz& a, const Lorentz& b) : start(a) {
    length = std::acosh(std::max(1.0, -minkowski(a, b)));
    if (length < 1e-14) return;
    const double ch = std::cosh(length), sh = std::sinh(length);
    for (int i = 0; i < 3; ++i) tangent[i] = (b[i] - ch * a[i]) / sh;
    // n = J (a x t): <n, v> is the determinant of (a, t, v)
    Lorentz n{-(a[1] * tangent[2] - a[2] * tangent[1]), a[2] * tangent[0] - a[0] * tangent[2],
              a[0] * tangent[1] - a[1] * tangent[0]};
    const double norm = std::sqrt(std::max(minkowski(n, n), 1e-300));
    for (int i = 0; i < 3; ++i) normal[i] = n[i] / norm;
  }

  Lorentz at(double t) const {
    const double ch = std::cosh(t), sh = std::sinh(t);
    return {ch * start[0] + sh * tangent[0], ch * start[1] + sh * tangent[1],
            ch * start[2] + sh * tangent[2]};
  }

  /// Exact distance from P to the segment: with foot parameter t_f and
  /// perpendicular distance h, cosh d(P, gamma(t)) = cosh h cosh(t - t_f).
  double distance(const Lorentz& p) const {
    const double a = -minkowski(p, start);
    if (length < 1e-14) return std::acosh(std::max(1.0, a));
    const double b = minkowski(p, tangent);
    const double c = minkowski(p, normal);
    const double foot = std::atanh(std::clamp(b / a, -1.0 + 1e-16, 1.0 - 1e-16));
    const double along = std::clamp(foot, 0.0, length) - foot;
    return std::acosh(std::max(1.0, std::sqrt(1.0 + c * c) * std::cosh(along)));
  }
};

/// max over sampled p on [x, y] of the distance to [x, z] u [y, z].
inline double disk_side_thinness(const Lorentz& x, const Lorentz& y, const Lorentz& z,
                                 double step) {
  const Segment side(x, y), s1(x, z), s2(y, z);
  const int n = std::max(1, static_cast<int>(std::ceil(side.length / step)));
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const Lorentz p = side.at(side.length * i / n);
    worst = std::max(worst, std::min(s1.distance(p), s2.distance(p)));
  }
  return worst;
}

inline std::vector<TreeVertex> tree_path(const RegularTree& tree, const TreeVertex& x,
                                         const TreeVertex& y) {
  std::vector<TreeVertex> path;
  const int d = tree_distance(x, y);
  for (int k = 0; k <= d; ++k) path.push_back(geodesic_point(tree, x, y, k));
  return path;
}

}  // namespace detail

/// Sampled lower estimate of the thin-triangle constant on triangles with
/// vertices uniform in B_{sample_radius}. Every side of each triangle is
/// probed; on the disk, points of the probed side are taken every
/// policy.delta_step and their distance to the other two sides is exact.
inline double delta_estimate(const PoincareDisk&, int n_triangles, double sample_radius,
                             std::uint64_t seed, const NumericPolicy& policy = {}) {
  if (n_triangles < 1) throw DomainError("delta_estimate needs at least one triangle");
  std::vector<double> worst(static_cast<std::size_t>(n_triangles), 0.0);
  parallel_for(worst.size(), [&](std::size_t i) {
    std::mt19937_64 rng(split_seed(seed, i));
    const DiskPoint o{};
    const auto x = detail::hyperboloid(random_disk_point(o, sample_radius, rng));
    const auto y = detail::hyperboloid(random_disk_point(o, sample_radius, rng));
    const auto z = detail::hyperboloid(random_disk_point(o, sample_radius, rng));
    const double step = policy.delta_step;
    worst[i] = std::max({detail::disk_side_thinness(x, y, z, step),
                         detail::disk_side_thinness(y, z, x, step),
                         detail::disk_side_thinness(z, x, y, step)});
  });
  return *std::max_element(worst.begin(), worst.end());
}

inline double delta_estimate(const RegularTree& tree, int n_triangles, double sample_radius,
                             std::uint64_t seed, const NumericPolicy& = {}) {
  if (n_triangles < 1) throw DomainError("delta_estimate needs at least one triangle");
  const int R = tree_radius(sample_radius);
  std::vector<double> worst(static_cast<std::size_t>(n_triangles), 0.0);
  parallel_for(worst.size(), [&](std::size_t i) {
    std::mt19937_64 rng(split_seed(seed, i));
    const TreeVertex v[3] = {random_tree_vertex(tree, tree.root(), R, rng),
                             random_tree_vertex(tree, tree.root(), R, rng),
                             random_tree_vertex(tree, tree.root(), R, rng)};
    double w = 0.0;
    for (int s = 0; s < 3; ++s) {
      const auto& a = v[s];
      const auto& b = v[(s + 1) % 3];
      const auto& c = v[(s + 2) % 3];
      auto other = detail::tree_path(tree, a, c);
      auto second = detail::tree_path(tree, b, c);
      other.insert(other.end(), second.begin(), second.end());
      for (const auto& p : detail::tree_path(tree, a, b)) {
        int best = std::numeric_limits<int>::max();
        for (const auto& q : other) best = std::min(best, tree_distance(p, q));
        w = std::max(w, static_cast<double>(best));
      }
    }
    worst[i] = w;
  });
  return *std::max_element(worst.begin(), worst.end());
}

// ---------------------------------------------------------------------------
// containment lemma

namespace detail {

inline void record_containment(ContainmentReport& report, double excess) {
  ++report.trials;
  if (excess > 0.0) ++report.violations;
  report.max_excess = std::max(report.max_excess, excess);
}

inline ContainmentReport merge(const std::vector<ContainmentReport>& parts) {
  ContainmentReport total;
  for (const auto& p : parts) {
    total.trials += p.trials;
    total.violations += p.violations;
    total.max_excess = std::max(total.max_excess, p.max_excess);
  }
  return total;
}

}  // namespace detail

/// Monte Carlo check of the containment lemma on the disk. Each trial builds
/// a triple with z in B(x,R) and B(y,R): x near the origin, z at a uniform
/// distance in [0, R] from x, y at a uniform distance in [0, R] from z.
inline ContainmentReport containment_check(const PoincareDisk& disk, double delta, int n_trials,
                                           double R, std::uint64_t seed) {
  if (n_trials < 1) throw DomainError("containment_check needs at least one trial");
  if (delta < 0.0) throw DomainError("delta must be non-negative");
  std::vector<ContainmentReport> parts(static_cast<std::size_t>(n_trials));
  parallel_for(parts.size(), [&](std::size_t i) {
    std::mt19937_64 rng(split_seed(seed, i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const DiskPoint x = random_disk_point(DiskPoint{}, 1.0, rng);
    const DiskPoint z = random_disk_point_at(x, R * unit(rng), rng);
    const DiskPoint y = random_disk_point_at(z, R * unit(rng), rng);
    const double r = dist(disk, x, y);
    const DiskPoint p = geodesic_point(disk, x, y, 0.5 * r);
    detail::record_containment(parts[i], dist(disk, p, z) - (R - 0.5 * r + 2.0 * delta));
  });
  return detail::merge(parts);
}

/// Tree version; the rounded midpoint earns a slack of 1/2.
inline ContainmentReport containment_check(const RegularTree& tree, double delta, int n_trials,
                                           double R, std::uint64_t seed) {
  if (n_trials < 1) throw DomainError("containment_check needs at least one trial");
  if (delta < 0.0) throw DomainError("delta must be non-negative");
  const int n = tree_radius(R);
  std::vector<ContainmentReport> parts(static_cast<std::size_t>(n_trials));
  parallel_for(parts.size(), [&](std::size_t i) {
    std::mt19937_64 rng(split_seed(seed, i));
    std::uniform_int_distribution<int> spread(0, n);
    const TreeVertex x = random_tree_vertex(tree, tree.root(), 2, rng);
    const TreeVertex z = random_tree_vertex_at(tree, x, spread(rng), rng);
    const TreeVertex y = random_tree_vertex_at(tree, z, spread(rng), rng);
    const int r = tree_distance(x, y);
    const TreeVertex p = geodesic_point(tree, x, y, 0.5 * r);
    detail::record_containment(parts[i], tree_distance(p, z) - (n - 0.5 * r + 2.0 * delta + 0.5));
  });
  return detail::merge(parts);
}

/// Every pair (root, y) with d(root, y) <= 2R and every z in the
/// intersection; homogeneity makes the choice x = root exhaustive.
inline ContainmentReport containment_exhaustive(const RegularTree& tree, double delta, double R) {
  const int n = tree_radius(R);
  const TreeVertex x = tree.root();
  const auto candidates = tree.ball(x, n);
  ContainmentReport report;
  for (const auto& y : tree.ball(x, 2 * n)) {
    const int r = tree_distance(x, y);
    const TreeVertex p = geodesic_point(tree, x, y, 0.5 * r);
    for (const auto& z : candidates) {
      if (tree_distance(y, z) > n) continue;
      detail::record_containment(report,
                                 tree_distance(p, z) - (n - 0.5 * r + 2.0 * delta + 0.5));
    }
  }
  return report;
}

}  // namespace hyperdpp
