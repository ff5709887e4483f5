#pragma once

#include "hyperdpp/space.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <vector>

namespace hyperdpp {

/// Constants of an exponential ball-growth certificate
/// c^{-1} e^{alpha R} <= lambda(B_R) <= c e^{alpha R} on [r_min, r_max],
/// together with the hyperbolicity constant delta used alongside it.
struct GrowthProfile {
  double c = 1.0;
  double alpha = 1.0;
  double delta = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;

  /// 4 (delta + log(c) / alpha): beyond this distance the lunule lower bound
  /// is positive.
  double r0() const { return 4.0 * (delta + std::log(c) / alpha); }

  /// exp(-alpha (r/2 - 2 delta - 2 log(c)/alpha)); below 1 exactly when r > r0.
  double decay(double r) const {
    return std::exp(-alpha * (0.5 * r - 2.0 * delta - 2.0 * std::log(c) / alpha));
  }
};

namespace detail {

inline std::vector<double> growth_grid(const PoincareDisk&, double lo, double hi, double step) {
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(lo + step * static_cast<double>(i));
  if (grid.back() < hi - 1e-12) grid.push_back(hi);
  return grid;
}

inline std::vector<double> growth_grid(const RegularTree&, double lo, double hi, double) {
  std::vector<double> grid;
  for (int r = static_cast<int>(std::ceil(lo - 1e-9)); r <= tree_radius(hi); ++r) grid.push_back(r);
  return grid;
}

inline void check_growth_range(const PoincareDisk&, double r_min, double r_max) {
  if (!(r_min > 0.0)) {
    throw DomainError("disk growth profile needs r_min > 0: lambda(B_0) = 0 admits no finite c");
  }
  if (!(r_min < r_max)) throw DomainError("growth profile needs r_min < r_max");
}

inline void check_growth_range(const RegularTree&, double r_min, double r_max) {
  if (r_min < 0.0) throw DomainError("tree growth profile needs r_min >= 0");
  if (!(r_min < r_max)) throw DomainError("growth profile needs r_min < r_max");
}

}  // namespace detail

/// Fits c for the model's analytic growth rate alpha. Besides the grid
/// maxima of both ratios, c covers lim lambda(B_R) e^{-alpha R}, the supremum
/// of the upper ratio since it increases in R for both models; c is then
/// inflated by 1%. Tree radii are integers.
template <class Space>
GrowthProfile fit_growth_profile(const Space& model, double delta, double r_min, double r_max,
                                 double grid_step) {
  detail::check_growth_range(model, r_min, r_max);
  if (delta < 0.0) throw DomainError("delta must be non-negative");
  if (!(grid_step > 0.0)) throw DomainError("grid_step must be positive");
  const double alpha = model.growth_exponent();
  double c = model.growth_limit();
  for (double R : detail::growth_grid(model, r_min, r_max, grid_step)) {
    const double vol = ball_volume(model, R);
    const double e = std::exp(alpha * R);
    c = std::max({c, e / vol, vol / e});
  }
  return {.c = 1.01 * c, .alpha = alpha, .delta = delta, .r_min = r_min, .r_max = r_max};
}

/// Largest relative violation of the two-sided bound over a grid of the
/// given step within the profile's range; <= 0 when the certificate holds.
template <class Space>
double growth_violation(const Space& model, const GrowthProfile& profile, double grid_step) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double R : detail::growth_grid(model, profile.r_min, profile.r_max, grid_step)) {
    const double vol = ball_volume(model, R);
    const double e = std::exp(profile.alpha * R);
    worst = std::max({worst, (e / profile.c - vol) / vol, (vol - profile.c * e) / vol});
  }
  return worst;
}

}  // namespace hyperdpp
