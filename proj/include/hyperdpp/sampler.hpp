#pragma once

// Exact sampling of the determinantal process restricted to B_R, through a
// discretized operator (Hough-Krishnapur-Peres-Virag spectral algorithm),
// and Monte Carlo count statistics.

#include "hyperdpp/dpp.hpp"
#include "hyperdpp/errors.hpp"
#include "hyperdpp/kernels.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/operator.hpp"
#include "hyperdpp/parallel.hpp"
#include "hyperdpp/quadrature.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

namespace hyperdpp {

/// Discretizes the kernel on B_R and accepts the spectrum if it lies in
/// [-tol, 1 + tol]; eigenvalues are then clamped to [0, 1].
template <class Space>
DiscretizedOperator<Space> discretize(const RadialKernel<Space>& kernel, double R,
                                      const QuadratureGrid& grid = {}, const NumericPolicy& policy = {}) {
  if constexpr (Space::is_discrete) {
    if (std::abs(R - std::round(R)) > 1e-9) throw DomainError("tree discretization needs an integer radius");
  }
  auto op = build_operator(kernel, R, grid, policy);
  if (op.hermitian_residual() > 1e-10 * std::max(1.0, kernel.koo())) {
    std::ostringstream msg;
    msg << "discretized " << kernel.label() << " is not Hermitian: |M - M*| = " << op.hermitian_residual();
    throw KernelImplementationError(msg.str());
  }
  const double tol = Space::is_discrete ? policy.eig_tol_tree : policy.eig_tol_disk;
  if (op.min_eigenvalue() < -tol || op.max_eigenvalue() > 1.0 + tol) {
    std::ostringstream msg;
    msg << "eigenvalues of the discretized " << kernel.label() << " on B_" << R << " span ["
        << op.min_eigenvalue() << ", " << op.max_eigenvalue() << "], outside [-" << tol << ", 1 + " << tol << "]";
    if constexpr (Space::is_discrete) {
      msg << "; the kernel is not a legal correlation kernel";
    } else {
      const auto [n_r, n_t] = disk_grid_size(R, grid, policy);
      msg << " with " << n_r << " x " << n_t << " nodes; try radial_nodes=" << 2 * n_r
          << " angular_nodes=" << 2 * n_t;
    }
    throw DiscretizationTooCoarseError(msg.str());
  }
  op.clamp_eigenvalues();
  return op;
}

/// Counts of numerical repairs made while sampling.
struct SampleLog {
  std::atomic<std::uint64_t> reorthogonalizations{0};
};

namespace detail {

/// Modified Gram-Schmidt, run twice over the columns of v.
inline void orthonormalize(Eigen::MatrixXcd& v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      for (Eigen::Index p = 0; p < c; ++p) v.col(c) -= v.col(p).dot(v.col(c)) * v.col(p);
      v.col(c).normalize();
    }
  }
}

inline double orthogonality_loss(const Eigen::MatrixXcd& v) {
  if (v.cols() == 0) return 0.0;
  const Eigen::MatrixXcd g = v.adjoint() * v - Eigen::MatrixXcd::Identity(v.cols(), v.cols());
  return g.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// One exact draw from the determinantal process with the operator's
/// eigenpairs: keep mode i with probability lambda_i, then place points one
/// at a time with density sum |v(j)|^2 / #modes, conditioning the remaining
/// span on each placed point.
template <class Space>
Configuration<Space> sample(const DiscretizedOperator<Space>& op, std::uint64_t seed, SampleLog* log = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> chosen;
  const auto& lambda = op.eigenvalues();
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (unit(rng) < lambda[i]) chosen.push_back(i);
  }
  Configuration<Space> config;
  config.region_radius = op.region_radius();
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXcd v(n, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = op.mode(chosen[c]);

  std::vector<double> cumulative(static_cast<std::size_t>(n));
  while (v.cols() > 0) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      total += v.row(j).squaredNorm();
      cumulative[static_cast<std::size_t>(j)] = total;
    }
    const double u = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto j = static_cast<Eigen::Index>(it - cumulative.begin());
    config.points.push_back(op.nodes()[static_cast<std::size_t>(j)]);

    // drop the direction that does not vanish at node j
    Eigen::Index pivot = 0;
    v.row(j).cwiseAbs().maxCoeff(&pivot);
    const complex vp = v(j, pivot);
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (c != pivot) v.col(c) -= v.col(pivot) * (v(j, c) / vp);
    }
    const Eigen::Index last = v.cols() - 1;
    if (pivot != last) v.col(pivot) = v.col(last);
    v.conservativeResize(Eigen::NoChange, last);
    detail::orthonormalize(v);
    if (detail::orthogonality_loss(v) > 1e-8) {
      detail::orthonormalize(v);
      if (log) ++log->reorthogonalizations;
    }
  }
  return config;
}

struct EmpiricalStats {
  std::size_t n_samples = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;
  double stderr_variance = 0.0;
  std::uint64_t reorthogonalizations = 0;
};

/// Jackknife mean and variance of a count sample.
inline EmpiricalStats count_statistics(const std::vector<double>& counts) {
  const std::size_t n = counts.size();
  if (n < 3) throw DomainError("count statistics need at least 3 samples");
  const double nd = static_cast<double>(n);
  EmpiricalStats s;
  s.n_samples = n;
  s.mean = pairwise_sum(counts) / nd;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (counts[i] - s.mean) * (counts[i] - s.mean);
  const double s2 = pairwise_sum(d2);
  s.variance = s2 / (nd - 1.0);
  // leave-one-out replicates on centered data: mean_i = -d_i/(n-1),
  // var_i = (S2 - d_i^2 - (n-1) mean_i^2) / (n-2)
  std::vector<double> mean_i(n), var_i(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = counts[i] - s.mean;
    mean_i[i] = -d / (nd - 1.0);
    var_i[i] = (s2 - d * d - (nd - 1.0) * mean_i[i] * mean_i[i]) / (nd - 2.0);
  }
  auto jackknife = [n, nd](const std::vector<double>& t) {
    const double bar = pairwise_sum(t) / nd;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (t[i] - bar) * (t[i] - bar);
    return std::sqrt((nd - 1.0) / nd * pairwise_sum(sq));
  };
  s.stderr_mean = jackknife(mean_i);
  s.stderr_variance = jackknife(var_i);
  return s;
}

/// Counts over n_samples independent draws; sample i uses split_seed(seed, i),
/// so the result does not depend on the number of threads.
template <class Space>
EmpiricalStats empirical_stats(const DiscretizedOperator<Space>& op, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw DomainError("empirical statistics need n_samples >= 100");
  std::vector<double> counts(n_samples);
  SampleLog log;
  parallel_for(n_samples, [&](std::size_t i) {
    counts[i] = static_cast<double>(sample(op, split_seed(seed, i), &log).size());
  });
  EmpiricalStats s = count_statistics(counts);
  s.reorthogonalizations = log.reorthogonalizations.load();
  return s;
}

template <class Space>
EmpiricalStats empirical_stats(const RadialKernel<Space>& kernel, double R, std::size_t n_samples,
                               std::uint64_t seed, const QuadratureGrid& grid = {},
                               const NumericPolicy& policy = {}) {
  if (n_samples < 100) throw DomainError("empirical statistics need n_samples >= 100");
  return empirical_stats(discretize(kernel, R, grid, policy), n_samples, seed);
}

}  // namespace hyperdpp
