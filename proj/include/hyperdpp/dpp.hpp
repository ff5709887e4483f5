#pragma once

// Correlation functions, expected counts and number variances of the
// determinantal process with a radial projection kernel.

#include "hyperdpp/errors.hpp"
#include "hyperdpp/kernels.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/quadrature.hpp"
#include "hyperdpp/space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace hyperdpp {

/// A finite simple configuration drawn in B_{region_radius}.
template <class Space>
struct Configuration {
  std::vector<typename Space::point_type> points;
  double region_radius = 0.0;

  std::size_t size() const { return points.size(); }
};

/// rho_n(x_1, ..., x_n) = det[K(x_i, x_j)], for 1 <= n <= 12.
template <class Space>
double correlation_rho_n(const RadialKernel<Space>& kernel,
                         const std::vector<typename Space::point_type>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 1 || n > 12) throw DomainError("correlation_rho_n needs 1 <= n <= 12 points");
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
  }
  const complex det = m.fullPivLu().determinant();
  const double scale = std::pow(std::max(kernel.koo(), 1e-300), static_cast<double>(n));
  if (std::abs(det.imag()) > 1e-10 * std::max(1.0, scale)) {
    std::ostringstream msg;
    msg << "kernel minor of " << kernel.label() << " has imaginary determinant " << det.imag();
    throw KernelImplementationError(msg.str());
  }
  return det.real();
}

/// E[number of points in B_R] = K(o, o) lambda(B_R).
template <class Space>
double expectation(const RadialKernel<Space>& kernel, double R) {
  if (R < 0.0) throw DomainError("radius must be non-negative");
  return kernel.koo() * ball_volume(kernel.model(), R);
}

namespace detail {

template <class Space>
double checked_tail(const RadialKernel<Space>& kernel, double a) {
  const double t = kernel.tail_mass(a);
  if (!std::isfinite(t)) {
    std::ostringstream msg;
    msg << "|K(o, .)|^2 of " << kernel.label() << " is not integrable: the variance has no finite tail";
    throw NonintegrableTailError(msg.str());
  }
  return t;
}

}  // namespace detail

/// var = int |K(o, x)|^2 lambda(B_R(x) \ B_R(o)) dlambda(x), reduced to the
/// radius r = d(o, x). Beyond r = 2R the lunule is a whole ball, so that part
/// is lambda(B_R) times the tail mass.
inline double variance_lunule(const RadialKernel<PoincareDisk>& kernel, double R,
                              const NumericPolicy& policy = {}) {
  if (R < 0.0) throw DomainError("radius must be non-negative");
  if (R == 0.0) return 0.0;
  const PoincareDisk& disk = kernel.model();
  const double tail = detail::checked_tail(kernel, 2.0 * R);
  double top = 2.0 * R;
  if (const auto s = kernel.support()) top = std::min(top, *s);
  auto f = [&](double r) { return kernel.shell_mass(r) * lunule_volume(disk, r, R, policy); };
  const double breaks[] = {R};
  const double near = integrate_split(f, 0.0, top, breaks, 1e3 * policy.quad_rel_tol, 0.0, policy.max_quad_panels);
  return near + ball_volume(disk, R) * tail;
}

inline double variance_lunule(const RadialKernel<RegularTree>& kernel, double R,
                              const NumericPolicy& = {}) {
  if (R < 0.0) throw DomainError("radius must be non-negative");
  const RegularTree& tree = kernel.model();
  const int n = tree_radius(R);
  const double tail = detail::checked_tail(kernel, 2.0 * n);
  std::vector<double> terms;
  for (int r = 1; r <= 2 * n; ++r) {
    const double c = kernel.coefficient(r);
    terms.push_back(c * c * lunule_volume(tree, r, n));
  }
  terms.push_back(ball_volume(tree, n) * tail);
  return pairwise_sum(terms);
}

/// var = int_{B_R} int_{S \ B_R} |K(x, y)|^2 dlambda(y) dlambda(x), with x at
/// radius rho and y at radius s > R in polar coordinates about o. The y
/// integral stops where the remaining mass is below tail_rel_tol of the
/// expected count.
inline double variance_direct(const RadialKernel<PoincareDisk>& kernel, double R,
                              const NumericPolicy& policy = {}) {
  if (R < 0.0) throw DomainError("radius must be non-negative");
  if (R == 0.0) return 0.0;
  detail::checked_tail(kernel, 0.0);
  double reach = 0.5;
  while (kernel.tail_mass(reach) > policy.tail_rel_tol * kernel.koo()) {
    reach += 0.5;
    if (reach > 400.0) {
      throw NonintegrableTailError("|K(o, .)|^2 of " + kernel.label() +
                                   " decays too slowly to truncate the variance integral");
    }
  }
  if (const auto s = kernel.support()) reach = std::min(reach, *s);
  const double s_cut = R + reach;
  const double inner_tol = policy.quad_rel_tol;
  const double middle_tol = 10.0 * policy.quad_rel_tol;
  const double outer_tol = 100.0 * policy.quad_rel_tol;

  // 2 int_0^pi k(d)^2 dphi, cosh d = cosh(s - rho) + 2 sinh s sinh rho sin^2(phi/2)
  auto angular = [&](double rho, double s) {
    const double base = std::cosh(s - rho);
    const double spread = 2.0 * std::sinh(s) * std::sinh(rho);
    auto g = [&](double phi) {
      const double sn = std::sin(0.5 * phi);
      const double k = kernel.modulus(std::acosh(base + spread * sn * sn));
      return k * k;
    };
    std::vector<double> breaks;
    if (spread > 0.0) {
      // |K|^2 falls off on the angular scale where the spread term reaches cosh(s - rho)
      for (double b = std::sqrt(2.0 * base / spread); b < std::numbers::pi; b *= 4.0) breaks.push_back(b);
    }
    return 2.0 * integrate_split(g, 0.0, std::numbers::pi, breaks, inner_tol, 0.0, policy.max_quad_panels);
  };
  auto radial = [&](double rho) {
    auto h = [&](double s) { return std::sinh(s) * angular(rho, s); };
    std::vector<double> breaks;
    for (double b = 0.5; R + b < s_cut; b *= 2.0) breaks.push_back(R + b);
    return integrate_split(h, R, s_cut, breaks, middle_tol, 0.0, policy.max_quad_panels);
  };
  auto outer = [&](double rho) { return 2.0 * std::numbers::pi * std::sinh(rho) * radial(rho); };
  const double breaks[] = {0.5 * R, R - std::min(0.5, 0.25 * R)};
  return integrate_split(outer, 0.0, R, breaks, outer_tol, 0.0, policy.max_quad_panels);
}

/// Tree version: sum over x in B_R of (mass of |K(x, .)|^2) minus the part
/// inside B_R. Vertices at equal depth are equivalent under the stabilizer
/// of the root, so one representative per depth is enumerated.
inline double variance_direct(const RadialKernel<RegularTree>& kernel, double R,
                              const NumericPolicy& = {}) {
  if (R < 0.0) throw DomainError("radius must be non-negative");
  const RegularTree& tree = kernel.model();
  const int n = tree_radius(R);
  const double c0 = kernel.coefficient(0);
  const double total = c0 * c0 + detail::checked_tail(kernel, 0.0);
  const auto ball = tree.ball(tree.root(), n);
  std::vector<double> outside;
  TreeVertex x = tree.root();
  for (int depth = 0; depth <= n; ++depth) {
    if (depth > 0) x = tree.child(x, 0);
    std::vector<double> inside;
    inside.reserve(ball.size());
    for (const auto& y : ball) {
      const double k = std::abs(kernel(x, y));
      inside.push_back(k * k);
    }
    outside.push_back(tree.sphere_count(depth) * (total - pairwise_sum(inside)));
  }
  return pairwise_sum(outside);
}

}  // namespace hyperdpp
