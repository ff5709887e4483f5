#pragma once

// The lower bound var / E >= C for balls: the constant C and the sweep that
// checks it radius by radius.

#include "hyperdpp/dpp.hpp"
#include "hyperdpp/errors.hpp"
#include "hyperdpp/growth.hpp"
#include "hyperdpp/kernels.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/operator.hpp"
#include "hyperdpp/parallel.hpp"
#include "hyperdpp/quadrature.hpp"
#include "hyperdpp/sampler.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyperdpp {

/// Lower bound for the lunule volume at distance r >= r0:
/// lambda(B_R) (1 - e^{-alpha (r/2 - 2 delta - 2 log(c)/alpha)}) / c^2.
template <class Space>
double lunule_lower_bound(const Space& model, const GrowthProfile& profile, double r, double R) {
  return ball_volume(model, R) * (1.0 - profile.decay(r)) / (profile.c * profile.c);
}

struct BoundConstant {
  double C = 0.0;
  double r0 = 0.0;
  bool degenerate = false;
  std::string warning;
};

namespace detail {

inline double weighted_tail(const RadialKernel<PoincareDisk>& kernel, const GrowthProfile& profile,
                            double r0, const NumericPolicy& policy) {
  const double mass = checked_tail(kernel, r0);
  if (mass <= 0.0) return 0.0;
  // int_{r0}^inf shell (1 - e) = tail(r0) - int_{r0}^inf shell e, and the
  // second integral beyond T is at most e(T) tail(T)
  double top = r0 + 1.0;
  while (profile.decay(top) * kernel.tail_mass(top) > policy.tail_rel_tol * mass) top += 1.0;
  if (const auto s = kernel.support()) top = std::min(top, std::max(*s, r0));
  std::vector<double> breaks;
  for (double b = r0 + 1.0; b < top; b += 4.0) breaks.push_back(b);
  auto f = [&](double r) { return kernel.shell_mass(r) * profile.decay(r); };
  const double damped = integrate_split(f, r0, top, breaks, policy.quad_rel_tol, 0.0, policy.max_quad_panels);
  return mass - damped;
}

inline double weighted_tail(const RadialKernel<RegularTree>& kernel, const GrowthProfile& profile,
                            double r0, const NumericPolicy& policy) {
  const int first = std::max(0, static_cast<int>(std::ceil(r0 - 1e-12)));
  const int last = kernel.support() ? static_cast<int>(*kernel.support())
                                    : std::max(first, policy.tree_profile_length) + 4096;
  std::vector<double> terms;
  for (int r = first; r <= last; ++r) terms.push_back(kernel.shell_mass(r) * (1.0 - profile.decay(r)));
  // beyond `last` the weight is at least 1 - e(last + 1)
  terms.push_back(checked_tail(kernel, last) * std::max(0.0, 1.0 - profile.decay(last + 1)));
  return pairwise_sum(terms);
}

}  // namespace detail

/// C = (1 / (c^2 K(o,o))) int_{d(o,x) > r0} |K(o,x)|^2 (1 - e^{-alpha (d/2 - 2 delta - 2 log(c)/alpha)}) dlambda(x).
template <class Space>
BoundConstant constant_C(const RadialKernel<Space>& kernel, const GrowthProfile& profile,
                         const NumericPolicy& policy = {}) {
  if (!(profile.c >= 1.0) || !(profile.alpha > 0.0) || profile.delta < 0.0) {
    throw DomainError("growth profile needs c >= 1, alpha > 0 and delta >= 0");
  }
  BoundConstant out;
  out.r0 = profile.r0();
  const double r0 = std::max(out.r0, 0.0);
  const double integral = detail::weighted_tail(kernel, profile, r0, policy);
  out.C = std::max(0.0, integral) / (profile.c * profile.c * kernel.koo());
  if (!(out.C > 0.0)) {
    out.C = 0.0;
    out.degenerate = true;
    std::ostringstream msg;
    msg << "degenerate bound: " << kernel.label() << " carries no mass beyond r0 = " << out.r0
        << ", so C = 0";
    out.warning = msg.str();
  }
  return out;
}

struct CSearchPoint {
  double c = 0.0;
  double C = 0.0;
};

struct CSearch {
  double best_c = 0.0;
  double best_C = 0.0;
  std::vector<CSearchPoint> points;
};

/// Evaluates C for c = factor * profile.c over factors >= 1 and keeps the
/// largest; C does not increase with c, so this returns the fitted c unless
/// numerical noise says otherwise.
template <class Space>
CSearch search_c(const RadialKernel<Space>& kernel, const GrowthProfile& profile,
                 const std::vector<double>& factors = {1.0, 1.1, 1.25, 1.5, 2.0},
                 const NumericPolicy& policy = {}) {
  CSearch out;
  out.best_C = -1.0;
  for (double f : factors) {
    if (!(f >= 1.0)) throw DomainError("c search factors must be >= 1");
    GrowthProfile p = profile;
    p.c = profile.c * f;
    const double C = constant_C(kernel, p, policy).C;
    out.points.push_back({p.c, C});
    if (C > out.best_C) {
      out.best_C = C;
      out.best_c = p.c;
    }
  }
  return out;
}

struct VarianceReport {
  double R = 0.0;
  double expectation = 0.0;
  double variance_lunule = 0.0;
  double variance_direct = 0.0;
  std::optional<double> variance_empirical;
  std::optional<double> stderr_empirical;
  std::optional<double> mean_empirical;
  std::optional<double> stderr_mean;
  double ratio = 0.0;
  double C = 0.0;
  bool pass = false;
  /// set when a computation at this radius failed
  std::string error;
};

struct EmpiricalOptions {
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  /// radii of the sweep that also get Monte Carlo statistics
  std::vector<double> radii;
  QuadratureGrid grid;
};

struct BoundReport {
  GrowthProfile profile;
  BoundConstant constant;
  std::vector<VarianceReport> sweep;

  bool all_pass() const {
    if (constant.degenerate) return false;
    for (const auto& v : sweep) {
      if (!v.pass) return false;
    }
    return true;
  }
};

/// Expectation, both variance routes and (optionally) Monte Carlo counts at
/// one radius. Errors are recorded in the report rather than thrown.
template <class Space>
VarianceReport variance_report(const RadialKernel<Space>& kernel, double R, const EmpiricalOptions& empirical,
                               const NumericPolicy& policy) {
  VarianceReport v;
  v.R = R;
  try {
    v.expectation = expectation(kernel, R);
    v.variance_lunule = variance_lunule(kernel, R, policy);
    v.variance_direct = variance_direct(kernel, R, policy);
    v.ratio = v.expectation > 0.0 ? v.variance_lunule / v.expectation : 0.0;
    for (double er : empirical.radii) {
      if (std::abs(er - R) > 1e-12 || empirical.n_samples == 0) continue;
      const auto stats = empirical_stats(kernel, R, empirical.n_samples,
                                         split_seed(empirical.seed, static_cast<std::uint64_t>(std::llround(R * 1e6))),
                                         empirical.grid, policy);
      v.variance_empirical = stats.variance;
      v.stderr_empirical = stats.stderr_variance;
      v.mean_empirical = stats.mean;
      v.stderr_mean = stats.stderr_mean;
      break;
    }
  } catch (const Error& e) {
    v.error = e.what();
  }
  return v;
}

/// Fills one report per radius and compares var / E with C.
template <class Space>
BoundReport theorem1_sweep(const RadialKernel<Space>& kernel, const GrowthProfile& profile,
                           const std::vector<double>& radii, const EmpiricalOptions& empirical = {},
                           const NumericPolicy& policy = {}) {
  for (double R : radii) {
    if (R < profile.r_min - 1e-12 || R > profile.r_max + 1e-12) {
      std::ostringstream msg;
      msg << "sweep radius " << R << " lies outside the profile range [" << profile.r_min << ", "
          << profile.r_max << "]";
      throw DomainError(msg.str());
    }
  }
  BoundReport report;
  report.profile = profile;
  report.constant = constant_C(kernel, profile, policy);
  report.sweep.resize(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    VarianceReport v = variance_report(kernel, radii[i], empirical, policy);
    v.C = report.constant.C;
    v.pass = v.error.empty() && !report.constant.degenerate && v.ratio >= v.C;
    report.sweep[i] = std::move(v);
  });
  return report;
}

}  // namespace hyperdpp
