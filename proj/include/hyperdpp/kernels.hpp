#pragma once

// Radial projection kernels: |K(x, y)| = k(d(x, y)). A kernel carries its
// complex evaluator, its radial modulus k, the radial density of
// |K(o, .)|^2 ("shell mass" k(r)^2 sigma(r)) and the mass beyond a radius,
// which is what the variance and bound computations integrate.

#include "hyperdpp/errors.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/quadrature.hpp"
#include "hyperdpp/space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyperdpp {

template <class Space>
class RadialKernel {
 public:
  using point_type = typename Space::point_type;

  struct Parts {
    double koo = 0.0;
    std::function<double(double)> modulus;
    std::function<double(double)> shell_mass;
    /// mass of |K(o, .)|^2 strictly beyond radius a; +inf if not integrable
    std::function<double(double)> tail_mass;
    std::function<complex(const point_type&, const point_type&)> evaluate;
    /// trees only: signed K(o, x) sqrt(s(r)) for d(o, x) = r
    std::function<double(int)> coefficient;
    /// k vanishes beyond this radius
    std::optional<double> support;
    std::string label;
    bool certified = false;
  };

  RadialKernel(Space model, Parts parts)
      : model_(std::move(model)), parts_(std::make_shared<const Parts>(std::move(parts))) {}

  const Space& model() const { return model_; }
  double koo() const { return parts_->koo; }
  double modulus(double r) const { return parts_->modulus(r); }
  double shell_mass(double r) const { return parts_->shell_mass(r); }
  double tail_mass(double a) const { return parts_->tail_mass(a); }
  double coefficient(int r) const { return parts_->coefficient(r); }
  std::optional<double> support() const { return parts_->support; }
  const std::string& label() const { return parts_->label; }
  /// True for built-in projections and for kernels that passed verify_projection.
  bool certified() const { return parts_->certified; }

  complex operator()(const point_type& x, const point_type& y) const {
    return parts_->evaluate(x, y);
  }

  /// Total mass of |K(o, .)|^2; equals koo for a projection.
  double total_mass() const {
    if constexpr (Space::is_discrete) return shell_mass(0.0) + tail_mass(0.0);
    else return tail_mass(0.0);
  }

  RadialKernel with_certificate() const {
    Parts p = *parts_;
    p.certified = true;
    return RadialKernel(model_, std::move(p));
  }

 private:
  Space model_;
  std::shared_ptr<const Parts> parts_;
};

// ---------------------------------------------------------------------------
// Bergman kernels on the disk

/// Weighted Bergman projection of weight (1 - |z|^2)^alpha, written against
/// the invariant area measure: K(z, w) = (alpha+1)/(4 pi)
/// ((1-|z|^2)(1-|w|^2))^{(alpha+2)/2} / (1 - z conj(w))^{alpha+2}.
inline RadialKernel<PoincareDisk> bergman_kernel(double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("Bergman weight alpha must be >= 0");
  using Kernel = RadialKernel<PoincareDisk>;
  const double koo = (alpha + 1.0) / (4.0 * std::numbers::pi);
  const double power = alpha + 2.0;
  Kernel::Parts p;
  p.koo = koo;
  p.modulus = [koo, power](double r) { return koo * std::pow(1.0 / std::cosh(0.5 * r), power); };
  p.shell_mass = [koo, alpha](double r) {
    if (r <= 0.0) return 0.0;
    // k^2 * 2 pi sinh r = koo^2 4 pi tanh(r/2) sech^{2 alpha + 2}(r/2)
    return koo * koo * 4.0 * std::numbers::pi * std::tanh(0.5 * r) *
           std::pow(1.0 / std::cosh(0.5 * r), 2.0 * alpha + 2.0);
  };
  p.tail_mass = [koo, alpha](double a) {
    return koo * std::pow(1.0 / std::cosh(0.5 * std::max(a, 0.0)), 2.0 * alpha + 2.0);
  };
  p.evaluate = [koo, power](const DiskPoint& x, const DiskPoint& y) {
    const complex denom = std::pow(1.0 - x.z() * std::conj(y.z()), power);
    return koo * std::pow(x.defect() * y.defect(), 0.5 * power) / denom;
  };
  std::ostringstream label;
  label << "bergman(alpha=" << alpha << ")";
  p.label = label.str();
  p.certified = true;
  return Kernel(PoincareDisk{}, std::move(p));
}

// ---------------------------------------------------------------------------
// tree kernels built from a radial coefficient table

namespace detail {

/// Tree kernel from signed coefficients c_r = K(o, x) sqrt(s(r)), r <= n,
/// plus the mass carried beyond r = n.
inline RadialKernel<RegularTree> tree_kernel_from_coefficients(
    const RegularTree& tree, std::vector<double> coeffs,
    std::function<double(int)> beyond_coefficient, std::function<double(int)> beyond_mass_from,
    std::string label, bool certified) {
  const auto table = std::make_shared<const std::vector<double>>(std::move(coeffs));
  const int n = static_cast<int>(table->size()) - 1;
  // suffix[r] = sum_{i >= r} c_i^2 (table part), accumulated from the far end
  auto suffix = std::make_shared<std::vector<double>>(table->size() + 1, 0.0);
  {
    double sum = 0.0, comp = 0.0;
    for (int r = n; r >= 0; --r) {
      const double y = (*table)[static_cast<std::size_t>(r)] * (*table)[static_cast<std::size_t>(r)] - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      (*suffix)[static_cast<std::size_t>(r)] = sum;
    }
  }
  auto coefficient = [table, n, beyond_coefficient](int r) -> double {
    if (r < 0) return 0.0;
    if (r <= n) return (*table)[static_cast<std::size_t>(r)];
    return beyond_coefficient ? beyond_coefficient(r) : 0.0;
  };
  auto signed_value = [tree, coefficient](int r) {
    const double c = coefficient(r);
    if (c == 0.0) return 0.0;
    return std::copysign(std::exp(std::log(std::abs(c)) - 0.5 * tree.log_sphere_count(r)), c);
  };
  RadialKernel<RegularTree>::Parts p;
  p.koo = (*table)[0];
  p.coefficient = coefficient;
  p.modulus = [signed_value](double r) { return std::abs(signed_value(tree_radius(r))); };
  p.shell_mass = [coefficient](double r) {
    const double c = coefficient(tree_radius(r));
    return c * c;
  };
  p.tail_mass = [suffix, n, beyond_mass_from](double a) {
    const int from = std::max(0, tree_radius(a) + 1);
    const double beyond = beyond_mass_from ? beyond_mass_from(std::max(from, n + 1)) : 0.0;
    if (from > n) return beyond;
    return (*suffix)[static_cast<std::size_t>(from)] + beyond;
  };
  p.evaluate = [signed_value](const TreeVertex& x, const TreeVertex& y) {
    return complex(signed_value(tree_distance(x, y)), 0.0);
  };
  if (!beyond_coefficient) p.support = static_cast<double>(n);
  p.label = std::move(label);
  p.certified = certified;
  return RadialKernel<RegularTree>(tree, std::move(p));
}

}  // namespace detail

/// Orthogonal projection onto the spectral subspace of the tree adjacency
/// operator for eigenvalues in [a, b]. Its root row is read off the spectral
/// measure of the root, the Kesten-McKay law
///   d mu = q sqrt(4(q-1) - t^2) / (2 pi (q^2 - t^2)) dt  on |t| <= 2 sqrt(q-1),
/// through the orthonormal polynomials p_r of mu, which satisfy
///   t p_0 = sqrt(q) p_1,  t p_1 = sqrt(q) p_0 + sqrt(q-1) p_2,
///   t p_r = sqrt(q-1) (p_{r-1} + p_{r+1})  (r >= 2):
///   K(o, x) sqrt(s(r)) = int_a^b p_r d mu,  r = d(o, x).
/// The coefficients are kept for r <= halo_radius; the mass they leave out
/// must stay below policy.tree_mass_tol * K(o,o).
inline RadialKernel<RegularTree> tree_spectral_kernel(const RegularTree& tree, double a, double b,
                                                      int halo_radius,
                                                      const NumericPolicy& policy = {}) {
  const double q = tree.degree();
  const double edge = 2.0 * std::sqrt(q - 1.0);
  const double slack = 1e-12 * edge;
  if (a > b) throw DomainError("spectral band must satisfy a <= b");
  if (a < -edge - slack || b > edge + slack) {
    std::ostringstream msg;
    msg << "spectral band [" << a << ", " << b << "] exceeds the adjacency spectrum [" << -edge
        << ", " << edge << "]";
    throw DomainError(msg.str());
  }
  if (halo_radius < 1) throw DomainError("halo_radius must be >= 1");
  std::ostringstream label;
  label << "tree_spectral(q=" << tree.degree() << ", band=[" << a << ", " << b << "])";
  if (a <= -edge + slack && b >= edge - slack) {
    // the whole spectrum: the identity operator
    return detail::tree_kernel_from_coefficients(tree, {1.0}, {}, {}, label.str(), true);
  }
  // t = edge cos(theta); band [a, b] <-> theta in [theta_b, theta_a]
  const double theta_a = std::acos(std::clamp(a / edge, -1.0, 1.0));
  const double theta_b = std::acos(std::clamp(b / edge, -1.0, 1.0));
  if (!(theta_a > theta_b)) {
    throw DegenerateKernelError("spectral band " + label.str() +
                                " has zero spectral measure: the projection has rank 0");
  }
  const GaussRule rule = gauss_legendre(halo_radius + 128, theta_b, theta_a);
  const std::size_t m = rule.nodes.size();
  std::vector<double> t(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double th = rule.nodes[i];
    const double s = std::sin(th), c = std::cos(th);
    t[i] = edge * c;
    // d mu in the theta variable
    w[i] = rule.weights[i] * 2.0 * q * (q - 1.0) * s * s /
           (std::numbers::pi * (q * q - 4.0 * (q - 1.0) * c * c));
  }
  std::vector<double> coeffs(static_cast<std::size_t>(halo_radius) + 1, 0.0);
  std::vector<double> prev(m, 1.0), cur(m), terms(m);
  coeffs[0] = pairwise_sum(w);
  for (std::size_t i = 0; i < m; ++i) {
    cur[i] = t[i] / std::sqrt(q);
    terms[i] = w[i] * cur[i];
  }
  coeffs[1] = pairwise_sum(terms);
  const double b1 = std::sqrt(q), bn = std::sqrt(q - 1.0);
  for (int r = 1; r < halo_radius; ++r) {
    const double back = r == 1 ? b1 : bn;
    for (std::size_t i = 0; i < m; ++i) {
      const double next = (t[i] * cur[i] - back * prev[i]) / bn;
      prev[i] = cur[i];
      cur[i] = next;
      terms[i] = w[i] * next;
    }
    coeffs[static_cast<std::size_t>(r) + 1] = pairwise_sum(terms);
  }
  const double koo = coeffs[0];
  if (koo < 1e-14) {
    throw DegenerateKernelError("spectral band " + label.str() + " has negligible spectral measure");
  }
  std::vector<double> squares(coeffs.size());
  for (std::size_t r = 0; r < coeffs.size(); ++r) squares[r] = coeffs[r] * coeffs[r];
  const double missing = koo - pairwise_sum(squares);
  if (missing > policy.tree_mass_tol * koo) {
    std::ostringstream msg;
    msg << "halo radius " << halo_radius << " too small for " << label.str()
        << ": the kept coefficients miss " << missing / koo
        << " of the reproducing mass; increase halo_radius";
    throw HaloTooSmallError(msg.str());
  }
  return detail::tree_kernel_from_coefficients(tree, std::move(coeffs), {}, {}, label.str(), true);
}

inline RadialKernel<RegularTree> tree_spectral_kernel(const RegularTree& tree, double a, double b,
                                                      const NumericPolicy& policy = {}) {
  return tree_spectral_kernel(tree, a, b, policy.tree_profile_length, policy);
}

// ---------------------------------------------------------------------------
// user-supplied radial profiles

struct ProfileEntry {
  double r = 0.0;
  double k = 0.0;
};

enum class Interpolation { linear, log_linear };
enum class TailRule { zero, exponential };

namespace detail {

inline void validate_profile(double koo, const std::vector<ProfileEntry>& table, bool integer_radii) {
  std::vector<std::string> problems;
  if (!(koo > 0.0)) problems.push_back("koo must be positive");
  if (table.empty()) problems.push_back("profile table is empty");
  else if (table.front().r != 0.0) problems.push_back("first entry must be at r = 0");
  else if (std::abs(table.front().k - koo) > 1e-12 * std::max(1.0, koo)) {
    problems.push_back("k(0) = " + std::to_string(table.front().k) + " differs from koo = " +
                       std::to_string(koo));
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = table[i];
    std::ostringstream where;
    where << "entry " << i << " (r=" << e.r << ", k=" << e.k << "): ";
    if (!(e.k >= 0.0)) problems.push_back(where.str() + "k must be non-negative");
    if (e.k > koo * (1.0 + 1e-12)) problems.push_back(where.str() + "k exceeds koo");
    if (i > 0 && !(e.r > table[i - 1].r)) problems.push_back(where.str() + "radii must increase");
    if (integer_radii && e.r != static_cast<double>(i)) {
      problems.push_back(where.str() + "tree profiles need radii 0, 1, 2, ...");
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid radial profile:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
}

/// Decay rate beta of k(r) ~ k_last e^{-beta (r - r_last)} from the last two
/// entries; 0 when it cannot be fitted.
inline double tail_rate(const std::vector<ProfileEntry>& table) {
  if (table.size() < 2) return 0.0;
  const auto& u = table[table.size() - 2];
  const auto& v = table.back();
  if (!(u.k > 0.0 && v.k > 0.0)) return 0.0;
  return std::log(u.k / v.k) / (v.r - u.r);
}

}  // namespace detail

/// Disk kernel with K(x, y) = k(d(x, y)) interpolated from a table. Beyond
/// the table, k is zero or continues the exponential decay of the last two
/// entries. The result is not certified until verify_projection passes.
inline RadialKernel<PoincareDisk> custom_radial_kernel(const PoincareDisk& disk, double koo,
                                                       std::vector<ProfileEntry> table,
                                                       Interpolation interp = Interpolation::linear,
                                                       TailRule tail = TailRule::zero) {
  detail::validate_profile(koo, table, false);
  const auto tab = std::make_shared<const std::vector<ProfileEntry>>(std::move(table));
  const double beta = tail == TailRule::exponential ? detail::tail_rate(*tab) : 0.0;
  const bool extrapolate = tail == TailRule::exponential && tab->size() >= 2 && tab->back().k > 0.0;
  const double r_last = tab->back().r;
  const double k_last = tab->back().k;

  auto modulus = [tab, interp, extrapolate, beta, r_last, k_last](double r) -> double {
    if (r < 0.0) r = 0.0;
    if (r >= r_last) {
      if (r == r_last) return k_last;
      return extrapolate ? k_last * std::exp(-beta * (r - r_last)) : 0.0;
    }
    auto hi = std::upper_bound(tab->begin(), tab->end(), r,
                               [](double v, const ProfileEntry& e) { return v < e.r; });
    auto lo = hi - 1;
    const double s = (r - lo->r) / (hi->r - lo->r);
    if (interp == Interpolation::log_linear && lo->k > 0.0 && hi->k > 0.0) {
      return std::exp((1.0 - s) * std::log(lo->k) + s * std::log(hi->k));
    }
    return (1.0 - s) * lo->k + s * hi->k;
  };
  auto shell = [modulus](double r) {
    const double k = modulus(r);
    return k * k * 2.0 * std::numbers::pi * std::sinh(r);
  };
  // mass beyond a >= r_last carried by the extrapolated tail
  auto beyond = [extrapolate, beta, r_last, k_last](double a) -> double {
    if (!extrapolate) return 0.0;
    if (!(2.0 * beta > 1.0)) return std::numeric_limits<double>::infinity();
    return std::numbers::pi * k_last * k_last *
           (std::exp((1.0 - 2.0 * beta) * a + 2.0 * beta * r_last) / (2.0 * beta - 1.0) -
            std::exp(-(1.0 + 2.0 * beta) * a + 2.0 * beta * r_last) / (2.0 * beta + 1.0));
  };
  // cumulative shell mass at the table radii, segment by segment
  const GaussRule unit = gauss_legendre(16, 0.0, 1.0);
  auto segment = [unit, shell](double lo, double hi) {
    double s = 0.0;
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
      s += unit.weights[i] * shell(lo + (hi - lo) * unit.nodes[i]);
    }
    return s * (hi - lo);
  };
  auto cumulative = std::make_shared<std::vector<double>>(tab->size(), 0.0);
  for (std::size_t i = 1; i < tab->size(); ++i) {
    (*cumulative)[i] = (*cumulative)[i - 1] + segment((*tab)[i - 1].r, (*tab)[i].r);
  }
  auto tail_mass = [tab, cumulative, segment, beyond, r_last](double a) -> double {
    if (a >= r_last) return beyond(std::max(a, r_last));
    a = std::max(a, 0.0);
    auto hi = std::upper_bound(tab->begin(), tab->end(), a,
                               [](double v, const ProfileEntry& e) { return v < e.r; });
    const auto idx = static_cast<std::size_t>(hi - tab->begin());
    return segment(a, hi->r) + (cumulative->back() - (*cumulative)[idx]) + beyond(r_last);
  };

  RadialKernel<PoincareDisk>::Parts p;
  p.koo = koo;
  p.modulus = modulus;
  p.shell_mass = shell;
  p.tail_mass = tail_mass;
  p.evaluate = [disk, modulus](const DiskPoint& x, const DiskPoint& y) {
    return complex(modulus(dist(disk, x, y)), 0.0);
  };
  if (!extrapolate) p.support = r_last;
  p.label = "custom(disk, " + std::to_string(tab->size()) + " entries)";
  return RadialKernel<PoincareDisk>(disk, std::move(p));
}

/// Tree kernel with K(x, y) = k(d(x, y)) from a table at radii 0, 1, ..., n.
inline RadialKernel<RegularTree> custom_radial_kernel(const RegularTree& tree, double koo,
                                                      std::vector<ProfileEntry> table,
                                                      Interpolation = Interpolation::linear,
                                                      TailRule tail = TailRule::zero) {
  detail::validate_profile(koo, table, true);
  std::vector<double> coeffs;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const double k = table[r].k;
    coeffs.push_back(k == 0.0 ? 0.0 : std::exp(std::log(k) + 0.5 * tree.log_sphere_count(static_cast<int>(r))));
  }
  std::function<double(int)> beyond_coefficient;
  std::function<double(int)> beyond_mass_from;
  const int n = static_cast<int>(table.size()) - 1;
  if (tail == TailRule::exponential && table.size() >= 2 && table.back().k > 0.0) {
    const double beta = detail::tail_rate(table);
    const double log_k_last = std::log(table.back().k);
    beyond_coefficient = [tree, beta, log_k_last, n](int r) {
      return std::exp(log_k_last - beta * (r - n) + 0.5 * tree.log_sphere_count(r));
    };
    // sum_{r >= f} c_r^2 = c_n^2 rho^{f-n} / (1 - rho), rho = (q-1) e^{-2 beta}
    const double rho = (tree.degree() - 1.0) * std::exp(-2.0 * beta);
    const double c_last = coeffs.back();
    beyond_mass_from = [rho, c_last, n](int from) {
      if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
      return c_last * c_last * std::pow(rho, from - n) / (1.0 - rho);
    };
  }
  return detail::tree_kernel_from_coefficients(
      tree, std::move(coeffs), std::move(beyond_coefficient), std::move(beyond_mass_from),
      "custom(" + tree.name() + ", " + std::to_string(table.size()) + " entries)", false);
}

/// factor * K, e.g. to exercise the legality check with an illegal kernel.
template <class Space>
RadialKernel<Space> scaled_kernel(const RadialKernel<Space>& kernel, double factor) {
  if (!(factor > 0.0)) throw DomainError("kernel scale factor must be positive");
  using Kernel = RadialKernel<Space>;
  typename Kernel::Parts p;
  p.koo = factor * kernel.koo();
  p.modulus = [kernel, factor](double r) { return factor * kernel.modulus(r); };
  p.shell_mass = [kernel, factor](double r) { return factor * factor * kernel.shell_mass(r); };
  p.tail_mass = [kernel, factor](double a) { return factor * factor * kernel.tail_mass(a); };
  p.evaluate = [kernel, factor](const typename Kernel::point_type& x,
                                const typename Kernel::point_type& y) { return factor * kernel(x, y); };
  if constexpr (Space::is_discrete) {
    p.coefficient = [kernel, factor](int r) { return factor * kernel.coefficient(r); };
  }
  p.support = kernel.support();
  std::ostringstream label;
  label << factor << " * " << kernel.label();
  p.label = label.str();
  return Kernel(kernel.model(), std::move(p));
}

}  // namespace hyperdpp
