#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace hyperdpp {

/// Summation with O(log n) error growth; the result does not depend on
/// anything but the order of the input.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b].
inline GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(n));
  rule.weights.reserve(static_cast<std::size_t>(n));
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto push = [&](double x) {
    const double dp = boost::math::legendre_p_prime(n, x);
    rule.nodes.push_back(mid + half * x);
    rule.weights.push_back(half * 2.0 / ((1.0 - x * x) * dp * dp));
  };
  // zeros are the non-negative roots in increasing order
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it != 0.0) push(-*it);
  }
  for (double x : zeros) push(x);
  return rule;
}

namespace detail {

struct Panel {
  double a, b, value, error;
};

template <class F>
Panel gk_panel(const F& f, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  const double value = Rule::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, value, err};
}

/// Globally adaptive 15/31-point Gauss-Kronrod: the panel with the largest
/// error estimate is bisected until the summed error meets the tolerance or
/// max_panels panels exist.
template <class F>
double adaptive_gk(const F& f, std::vector<Panel> panels, double rel_tol, double abs_tol,
                   unsigned max_panels) {
  auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::make_heap(panels.begin(), panels.end(), worse);
  auto totals = [&panels] {
    std::vector<double> v(panels.size()), e(panels.size());
    for (std::size_t i = 0; i < panels.size(); ++i) {
      v[i] = panels[i].value;
      e[i] = panels[i].error;
    }
    return std::pair{pairwise_sum(v), pairwise_sum(e)};
  };
  double value = 0.0, error = 0.0;
  for (std::tie(value, error) = totals(); panels.size() < max_panels;) {
    if (error <= std::max(abs_tol, rel_tol * std::abs(value))) break;
    std::pop_heap(panels.begin(), panels.end(), worse);
    const Panel worst = panels.back();
    panels.pop_back();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {
      // cannot split further; keep it as it is
      panels.push_back({worst.a, worst.b, worst.value, 0.0});
      std::push_heap(panels.begin(), panels.end(), worse);
      continue;
    }
    for (const Panel& half : {gk_panel(f, worst.a, m), gk_panel(f, m, worst.b)}) {
      panels.push_back(half);
      std::push_heap(panels.begin(), panels.end(), worse);
    }
    value += panels[panels.size() - 1].value + panels[panels.size() - 2].value - worst.value;
    error += panels[panels.size() - 1].error + panels[panels.size() - 2].error - worst.error;
    if (panels.size() % 64 == 0) std::tie(value, error) = totals();
  }
  // final sum in position order, independent of the refinement history
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::vector<double> v(panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) v[i] = panels[i].value;
  return pairwise_sum(v);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b]; stops when the total
/// error estimate is below max(abs_tol, rel_tol |integral|).
template <class F>
double integrate(const F& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                 unsigned max_panels = 2000) {
  if (!(b > a)) return 0.0;
  return detail::adaptive_gk(f, {detail::gk_panel(f, a, b)}, rel_tol, abs_tol, max_panels);
}

/// Same, starting from the panels cut at the given interior break points,
/// which should sit on kinks or near peaks of f.
template <class F>
double integrate_split(const F& f, double a, double b, std::span<const double> breaks,
                       double rel_tol, double abs_tol = 0.0, unsigned max_panels = 2000) {
  if (!(b > a)) return 0.0;
  std::vector<detail::Panel> panels;
  double lo = a;
  for (double x : breaks) {
    if (x <= lo || x >= b) continue;
    panels.push_back(detail::gk_panel(f, lo, x));
    lo = x;
  }
  panels.push_back(detail::gk_panel(f, lo, b));
  const auto budget = std::max<unsigned>(max_panels, static_cast<unsigned>(2 * panels.size()));
  return detail::adaptive_gk(f, std::move(panels), rel_tol, abs_tol, budget);
}

}  // namespace hyperdpp
