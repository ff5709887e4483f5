#pragma once

// Legality of a kernel as a determinantal correlation kernel: the restricted
// operator must satisfy 0 <= K <= I, and a projection must reproduce itself.

#include "hyperdpp/errors.hpp"
#include "hyperdpp/kernels.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/operator.hpp"
#include "hyperdpp/quadrature.hpp"
#include "hyperdpp/space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace hyperdpp {

struct ProjectionReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  /// max over sample pairs of |int K(x,y) K(y,z) dl(y) - K(x,z)|
  double reproducing_residual = 0.0;
  /// max_r (k(r) - koo)^+
  double cs_residual = 0.0;
  double hermitian_residual = 0.0;
  double tol = 0.0;
  std::size_t size = 0;
  bool pass = false;
};

namespace detail {

inline double cs_residual(const RadialKernel<PoincareDisk>& kernel, double r_max) {
  double worst = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    worst = std::max(worst, kernel.modulus(r_max * i / 4000.0) - kernel.koo());
  }
  return worst;
}

inline double cs_residual(const RadialKernel<RegularTree>& kernel, double r_max) {
  double worst = 0.0;
  for (int r = 0; r <= tree_radius(r_max); ++r) worst = std::max(worst, kernel.modulus(r) - kernel.koo());
  return worst;
}

/// Reproducing residual on the disk over pairs of four fixed points of B_R,
/// integrating y over a ball large enough to hold all but a negligible part
/// of |K(x, .)|^2.
inline double reproducing_residual(const RadialKernel<PoincareDisk>& kernel, double R,
                                   const NumericPolicy& policy) {
  const double reach = std::max(R, 0.0);
  const std::vector<DiskPoint> probes = {DiskPoint::polar(0.0, 0.0), DiskPoint::polar(0.5 * reach, 0.3),
                                         DiskPoint::polar(reach, 2.1), DiskPoint::polar(reach, 4.0)};
  // truncation: by Cauchy-Schwarz the neglected part is at most the tail
  // mass beyond (R_big - reach), wanted below tail_rel_tol * koo
  double r_big = reach + 1.0;
  const double cap = 25.5;
  while (r_big < cap && kernel.tail_mass(r_big - reach) > policy.tail_rel_tol * kernel.koo()) r_big += 0.5;
  r_big = std::min(r_big, cap);
  if (const auto s = kernel.support()) r_big = std::min(r_big, *s + reach);

  const int angles = 1024;
  const GaussRule panel = gauss_legendre(10, 0.0, 0.5);
  const int panels = static_cast<int>(std::ceil(r_big / 0.5));
  std::vector<DiskPoint> ys;
  std::vector<double> ws;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double lo = 0.5 * pnl;
    for (std::size_t i = 0; i < panel.nodes.size(); ++i) {
      const double r = lo + panel.nodes[i];
      const double w = panel.weights[i] * std::sinh(r) * 2.0 * std::numbers::pi / angles;
      for (int a = 0; a < angles; ++a) {
        ys.push_back(DiskPoint::polar(r, 2.0 * std::numbers::pi * a / angles));
        ws.push_back(w);
      }
    }
  }
  // K(probe_i, y) for every y
  std::vector<std::vector<complex>> rows(probes.size(), std::vector<complex>(ys.size()));
  parallel_for(probes.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < ys.size(); ++j) rows[i][j] = kernel(probes[i], ys[j]);
  });
  double worst = 0.0;
  std::vector<double> re(ys.size()), im(ys.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t k = i; k < probes.size(); ++k) {
      // K(x, y) K(y, z) = K(x, y) conj(K(z, y))
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const complex v = ws[j] * rows[i][j] * std::conj(rows[k][j]);
        re[j] = v.real();
        im[j] = v.imag();
      }
      const complex integral(pairwise_sum(re), pairwise_sum(im));
      worst = std::max(worst, std::abs(integral - kernel(probes[i], probes[k])));
    }
  }
  return worst;
}

/// Reproducing residual on the tree for x = o and z at distance m <= 2R:
/// sum_y K(o, y) K(y, z) grouped by where y leaves the geodesic [o, z].
inline double reproducing_residual(const RadialKernel<RegularTree>& kernel, double R,
                                   const NumericPolicy& policy) {
  const RegularTree& tree = kernel.model();
  const int q = tree.degree();
  const int m_max = 2 * tree_radius(R);
  const int reach = kernel.support() ? static_cast<int>(*kernel.support()) : policy.tree_profile_length;
  // log |K| at distance r and its sign
  auto log_abs = [&](int r) { return std::log(std::abs(kernel.coefficient(r))) - 0.5 * tree.log_sphere_count(r); };
  auto sign = [&](int r) { return kernel.coefficient(r) < 0.0 ? -1.0 : 1.0; };
  double worst = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    std::vector<double> terms;
    for (int j = 0; j <= m; ++j) {
      for (int h = 0; j + h <= reach && m - j + h <= reach; ++h) {
        const double c1 = kernel.coefficient(j + h);
        const double c2 = kernel.coefficient(m - j + h);
        if (c1 == 0.0 || c2 == 0.0) continue;
        const double log_count = log_tree_segment_class_count(q, m, j, h);
        if (std::isinf(log_count)) continue;
        terms.push_back(sign(j + h) * sign(m - j + h) * std::exp(log_count + log_abs(j + h) + log_abs(m - j + h)));
      }
    }
    const double target = kernel.coefficient(m) == 0.0 ? 0.0 : sign(m) * std::exp(log_abs(m));
    worst = std::max(worst, std::abs(pairwise_sum(terms) - target));
  }
  return worst;
}

}  // namespace detail

/// Discretizes the kernel on B_{R_test} and checks 0 <= M <= I within the
/// model's tolerance; also reports the reproducing and Cauchy-Schwarz
/// residuals. Throws KernelImplementationError for a non-Hermitian matrix.
template <class Space>
ProjectionReport verify_projection(const RadialKernel<Space>& kernel, double R_test,
                                   const QuadratureGrid& grid = {}, const NumericPolicy& policy = {}) {
  const auto op = build_operator(kernel, R_test, grid, policy);
  ProjectionReport rep;
  rep.tol = Space::is_discrete ? policy.eig_tol_tree : policy.eig_tol_disk;
  // entries are of size koo, so Hermitian symmetry is judged relative to it
  const double herm_tol = 1e-10 * std::max(1.0, kernel.koo());
  rep.hermitian_residual = op.hermitian_residual();
  if (rep.hermitian_residual > herm_tol) {
    std::ostringstream msg;
    msg << "discretized " << kernel.label() << " is not Hermitian: |M - M*| = " << rep.hermitian_residual;
    throw KernelImplementationError(msg.str());
  }
  rep.size = op.size();
  rep.min_eig = op.min_eigenvalue();
  rep.max_eig = op.max_eigenvalue();
  rep.cs_residual = detail::cs_residual(kernel, 2.0 * R_test + 10.0);
  rep.reproducing_residual = detail::reproducing_residual(kernel, R_test, policy);
  rep.pass = rep.min_eig >= -rep.tol && rep.max_eig <= 1.0 + rep.tol;
  return rep;
}

}  // namespace hyperdpp
