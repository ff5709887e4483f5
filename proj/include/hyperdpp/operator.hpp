#pragma once

// Finite stand-ins for the restricted operator P_B K P_B on a ball B_R:
// M_ij = sqrt(w_i w_j) K(x_i, x_j) over quadrature nodes x_i with weights w_i
// (unit weights on trees), with its eigendecomposition.
//
// On the disk the nodes form a polar product grid (Gauss-Legendre in the
// radius, uniform in the angle). Kernels of the disk are invariant under
// rotations about the origin, so M is block circulant in the angular index
// and splits into one Hermitian (rings x rings) block per angular frequency.

#include "hyperdpp/errors.hpp"
#include "hyperdpp/kernels.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/parallel.hpp"
#include "hyperdpp/quadrature.hpp"
#include "hyperdpp/space.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

namespace hyperdpp {

/// Node counts for the disk grid; zero means "derive from the policy".
struct QuadratureGrid {
  int radial_nodes = 0;
  int angular_nodes = 0;
};

template <class Space>
class DiscretizedOperator {
 public:
  using point_type = typename Space::point_type;

  std::size_t size() const { return nodes_.size(); }
  const std::vector<point_type>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  double region_radius() const { return radius_; }
  double hermitian_residual() const { return hermitian_residual_; }
  double trace() const { return trace_; }

  double min_eigenvalue() const {
    return eigenvalues_.empty() ? 0.0 : *std::min_element(eigenvalues_.begin(), eigenvalues_.end());
  }
  double max_eigenvalue() const {
    return eigenvalues_.empty() ? 0.0 : *std::max_element(eigenvalues_.begin(), eigenvalues_.end());
  }

  /// Unit-norm eigenvector for eigenvalues()[i], indexed like nodes().
  Eigen::VectorXcd mode(std::size_t i) const {
    const auto [block, column] = modes_[i];
    if (angles_ == 0) return dense_vectors_.col(static_cast<Eigen::Index>(column));
    const auto& u = block_vectors_[block];
    Eigen::VectorXcd v(static_cast<Eigen::Index>(size()));
    for (std::size_t a = 0; a < angles_; ++a) {
      const complex phase = roots_[block * a % angles_];
      for (std::size_t k = 0; k < rings_; ++k) {
        v(static_cast<Eigen::Index>(k * angles_ + a)) =
            u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(column)) * phase;
      }
    }
    return v;
  }

  /// Clamp eigenvalues into [0, 1] once their range has been accepted.
  void clamp_eigenvalues() {
    for (double& e : eigenvalues_) e = std::clamp(e, 0.0, 1.0);
  }

 private:
  friend DiscretizedOperator<PoincareDisk> build_disk_operator(const RadialKernel<PoincareDisk>&, double,
                                                               const QuadratureGrid&, const NumericPolicy&);
  friend DiscretizedOperator<RegularTree> build_tree_operator(const RadialKernel<RegularTree>&, double);

  std::vector<point_type> nodes_;
  std::vector<double> weights_;
  std::vector<double> eigenvalues_;
  std::vector<std::pair<std::size_t, std::size_t>> modes_;  // eigenvalue -> (block, column)
  double radius_ = 0.0;
  double hermitian_residual_ = 0.0;
  double trace_ = 0.0;
  // tree: dense eigenvectors
  Eigen::MatrixXcd dense_vectors_;
  // disk: block eigenvectors, one block per angular frequency
  std::size_t rings_ = 0;
  std::size_t angles_ = 0;
  std::vector<Eigen::MatrixXcd> block_vectors_;
  // e^{2 pi i t / angles} / sqrt(angles)
  std::vector<complex> roots_;
};

/// Disk grid sizes for radius R.
inline std::pair<int, int> disk_grid_size(double R, const QuadratureGrid& grid,
                                          const NumericPolicy& policy) {
  int rings = grid.radial_nodes;
  if (rings <= 0) {
    rings = std::max(policy.min_radial_nodes,
                     static_cast<int>(std::ceil(policy.radial_nodes_per_unit * R)));
  }
  int angles = grid.angular_nodes;
  if (angles <= 0) {
    const int wanted = std::max(
        policy.min_angular_nodes,
        static_cast<int>(std::ceil(policy.angular_nodes_per_unit * 2.0 * std::numbers::pi * std::sinh(R))));
    angles = 1;
    while (angles < wanted) angles *= 2;
  }
  return {rings, angles};
}

inline DiscretizedOperator<PoincareDisk> build_disk_operator(const RadialKernel<PoincareDisk>& kernel,
                                                             double R, const QuadratureGrid& grid,
                                                             const NumericPolicy& policy) {
  if (!(R > 0.0)) throw DomainError("discretization radius must be positive");
  if (grid.radial_nodes < 0 || grid.angular_nodes < 0) throw DomainError("grid node counts must be non-negative");
  const auto [n_r, n_t] = disk_grid_size(R, grid, policy);
  if (n_r < 1 || n_t < 1) throw DomainError("grid resolution must be positive");
  const auto rings = static_cast<std::size_t>(n_r);
  const auto angles = static_cast<std::size_t>(n_t);
  const GaussRule radial = gauss_legendre(n_r, 0.0, R);

  DiscretizedOperator<PoincareDisk> op;
  op.radius_ = R;
  op.rings_ = rings;
  op.angles_ = angles;
  for (std::size_t t = 0; t < angles; ++t) {
    op.roots_.push_back(std::polar(1.0 / std::sqrt(static_cast<double>(angles)),
                                   2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(angles)));
  }
  std::vector<double> ring_weight(rings);
  std::vector<DiskPoint> ring_start(rings);
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(angles);
  for (std::size_t k = 0; k < rings; ++k) {
    ring_weight[k] = radial.weights[k] * std::sinh(radial.nodes[k]) * dtheta;
    ring_start[k] = DiskPoint::polar(radial.nodes[k], 0.0);
    for (std::size_t a = 0; a < angles; ++a) {
      op.nodes_.push_back(DiskPoint::polar(radial.nodes[k], dtheta * static_cast<double>(a)));
      op.weights_.push_back(ring_weight[k]);
    }
  }

  // f_kl(j) = K(ring k at angle 0, ring l at angle j) and its transform
  // F_kl(m) = sum_j f_kl(j) e^{2 pi i m j / n}; Eigen's forward FFT uses e^{-...}
  std::vector<std::vector<complex>> spectrum(rings * rings);
  parallel_for(rings, [&](std::size_t k) {
    Eigen::FFT<double> fft;
    std::vector<complex> f(angles);
    for (std::size_t l = 0; l < rings; ++l) {
      for (std::size_t j = 0; j < angles; ++j) f[j] = kernel(ring_start[k], op.nodes_[l * angles + j]);
      fft.fwd(spectrum[k * rings + l], f);
    }
  });

  // the block structure needs K(e^{it} x, e^{it} y) = K(x, y)
  {
    const std::size_t shift = std::max<std::size_t>(1, angles / 3);
    double drift = 0.0;
    for (std::size_t k = 0; k < rings; k += std::max<std::size_t>(1, rings / 4)) {
      for (std::size_t l = 0; l < rings; l += std::max<std::size_t>(1, rings / 4)) {
        for (std::size_t j = 0; j < angles; j += std::max<std::size_t>(1, angles / 8)) {
          const complex rotated =
              kernel(op.nodes_[k * angles + shift], op.nodes_[l * angles + (j + shift) % angles]);
          const complex plain = kernel(ring_start[k], op.nodes_[l * angles + j]);
          drift = std::max(drift, std::abs(rotated - plain));
        }
      }
    }
    if (drift > 1e-10 * std::max(1.0, kernel.koo())) {
      throw KernelImplementationError("kernel " + kernel.label() +
                                      " is not invariant under rotations about the origin");
    }
  }

  op.block_vectors_.resize(angles);
  std::vector<std::vector<double>> block_values(angles);
  std::vector<double> block_residual(angles, 0.0);
  std::vector<double> block_trace(angles, 0.0);
  parallel_for(angles, [&](std::size_t m) {
    Eigen::MatrixXcd block(n_r, n_r);
    const std::size_t src = (angles - m) % angles;
    for (std::size_t k = 0; k < rings; ++k) {
      for (std::size_t l = 0; l < rings; ++l) {
        block(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
            std::sqrt(ring_weight[k] * ring_weight[l]) * spectrum[k * rings + l][src];
      }
    }
    // M is Hermitian exactly when every frequency block is
    block_residual[m] = (block - block.adjoint()).cwiseAbs().maxCoeff();
    block_trace[m] = block.trace().real();
    const Eigen::MatrixXcd hermitian = 0.5 * (block + block.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitian);
    op.block_vectors_[m] = eig.eigenvectors();
    block_values[m].assign(eig.eigenvalues().data(), eig.eigenvalues().data() + n_r);
  });
  op.hermitian_residual_ = *std::max_element(block_residual.begin(), block_residual.end());
  op.trace_ = pairwise_sum(block_trace);
  for (std::size_t m = 0; m < angles; ++m) {
    for (std::size_t c = 0; c < rings; ++c) {
      op.eigenvalues_.push_back(block_values[m][c]);
      op.modes_.emplace_back(m, c);
    }
  }
  return op;
}

inline DiscretizedOperator<RegularTree> build_tree_operator(const RadialKernel<RegularTree>& kernel,
                                                            double R) {
  if (R < 0.0) throw DomainError("discretization radius must be non-negative");
  const RegularTree& tree = kernel.model();
  DiscretizedOperator<RegularTree> op;
  op.radius_ = tree_radius(R);
  op.nodes_ = tree.ball(tree.root(), tree_radius(R));
  const auto n = static_cast<Eigen::Index>(op.nodes_.size());
  op.weights_.assign(op.nodes_.size(), 1.0);
  Eigen::MatrixXd m(n, n);
  double residual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const complex kij = kernel(op.nodes_[static_cast<std::size_t>(i)], op.nodes_[static_cast<std::size_t>(j)]);
      const complex kji = kernel(op.nodes_[static_cast<std::size_t>(j)], op.nodes_[static_cast<std::size_t>(i)]);
      residual = std::max({residual, std::abs(kij - std::conj(kji)), std::abs(kij.imag())});
      m(i, j) = m(j, i) = kij.real();
    }
  }
  op.hermitian_residual_ = residual;
  op.trace_ = m.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  op.dense_vectors_ = eig.eigenvectors().cast<complex>();
  for (Eigen::Index j = 0; j < n; ++j) {
    op.eigenvalues_.push_back(eig.eigenvalues()(j));
    op.modes_.emplace_back(0, static_cast<std::size_t>(j));
  }
  return op;
}

/// Assembles and diagonalizes M on B_R without judging its spectrum.
template <class Space>
DiscretizedOperator<Space> build_operator(const RadialKernel<Space>& kernel, double R,
                                          const QuadratureGrid& grid = {},
                                          const NumericPolicy& policy = {}) {
  if constexpr (Space::is_discrete) return build_tree_operator(kernel, R);
  else return build_disk_operator(kernel, R, grid, policy);
}

}  // namespace hyperdpp
