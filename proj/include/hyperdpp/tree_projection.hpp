#pragma once

// Finite-volume spectral projections on balls of the q-regular tree. These
// are the brute-force counterparts of tree_spectral_kernel: the projection
// of the adjacency matrix of B_N onto eigenvalues in [a, b].

#include "hyperdpp/errors.hpp"
#include "hyperdpp/space.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <vector>

namespace hyperdpp {

struct FiniteBallProjection {
  /// K_N(o, y) for d(o, y) = r, r = 0..N
  std::vector<double> root_row;
  /// largest spread of K_N(o, y) over y on a common sphere about the root
  double radialization_residual = 0.0;
  int rank = 0;
};

/// Dense construction: adjacency matrix of B_N, full eigendecomposition,
/// projection onto the band. Sizes grow like (q-1)^N; meant for small N.
inline FiniteBallProjection finite_ball_projection(const RegularTree& tree, double a, double b,
                                                   int N) {
  const auto vertices = tree.ball(tree.root(), N);
  const auto n = static_cast<Eigen::Index>(vertices.size());
  std::map<TreeVertex, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index.emplace(vertices[static_cast<std::size_t>(i)], i);
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& nb : tree.neighbors(vertices[static_cast<std::size_t>(i)])) {
      auto it = index.find(nb);
      if (it != index.end()) adjacency(i, it->second) = 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(adjacency);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double ev = eig.eigenvalues()(j);
    if (ev >= a - 1e-12 && ev <= b + 1e-12) kept.push_back(j);
  }
  if (kept.empty()) throw DegenerateKernelError("band contains no eigenvalue of the ball adjacency");
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    basis.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(kept[c]);
  }
  const Eigen::MatrixXd projection = basis * basis.transpose();

  FiniteBallProjection out;
  out.rank = static_cast<int>(kept.size());
  out.root_row.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.root_row[vertices[static_cast<std::size_t>(j)].depth()] = projection(0, j);
  }
  std::map<std::size_t, std::vector<double>> spheres;
  for (Eigen::Index j = 0; j < n; ++j) {
    spheres[vertices[static_cast<std::size_t>(j)].depth()].push_back(projection(0, j));
  }
  for (const auto& [r, values] : spheres) {
    for (double v : values) {
      out.radialization_residual = std::max(out.radialization_residual, std::abs(v - values.front()));
    }
  }
  return out;
}

/// Root row of the same projection computed in the radial sector only: the
/// (N+1)-dimensional Jacobi matrix of the adjacency on sphere indicators.
/// Returns c_r = K_N(o, y) sqrt(s(r)), r = 0..N. Cheap for large N.
inline std::vector<double> radial_jacobi_coefficients(const RegularTree& tree, double a, double b,
                                                      int N) {
  const double q = tree.degree();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(N + 1);
  Eigen::VectorXd off(N);
  for (int r = 0; r < N; ++r) off(r) = r == 0 ? std::sqrt(q) : std::sqrt(q - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  std::vector<double> c(static_cast<std::size_t>(N) + 1, 0.0);
  for (Eigen::Index j = 0; j <= N; ++j) {
    const double ev = eig.eigenvalues()(j);
    if (ev < a - 1e-12 || ev > b + 1e-12) continue;
    const double head = eig.eigenvectors()(0, j);
    for (int r = 0; r <= N; ++r) c[static_cast<std::size_t>(r)] += head * eig.eigenvectors()(r, j);
  }
  return c;
}

}  // namespace hyperdpp
