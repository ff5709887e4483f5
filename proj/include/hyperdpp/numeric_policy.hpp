#pragma once

namespace hyperdpp {

/// Every tolerance and resolution knob used by the library, in one place so
/// that reports can record exactly what produced them.
struct NumericPolicy {
  // relative tolerance for adaptive Gauss-Kronrod integration
  double quad_rel_tol = 1e-10;
  // absolute tolerance of the disk lunule area integral
  double lunule_abs_tol = 1e-8;
  // neglected tail mass relative to the quantity being computed
  double tail_rel_tol = 1e-12;
  // panel budget of one adaptive integration
  unsigned max_quad_panels = 2000;

  // projection legality
  double eig_tol_disk = 1e-6;
  double eig_tol_tree = 1e-8;

  // disk discretization: radial Gauss-Legendre nodes per unit radius and
  // angular nodes per unit of circumference at the outer ring
  double radial_nodes_per_unit = 12.0;
  double angular_nodes_per_unit = 6.0;
  int min_radial_nodes = 8;
  int min_angular_nodes = 16;

  // geodesic sampling step used by delta_estimate on the disk
  double delta_step = 0.01;

  // number of radial coefficients kept for the tree spectral kernel
  int tree_profile_length = 2048;
  // allowed fraction of the reproducing mass lost to profile truncation
  double tree_mass_tol = 1e-3;
};

}  // namespace hyperdpp
