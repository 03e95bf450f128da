#pragma once

#include "rcas/array_model.hpp"
#include "rcas/types.hpp"

namespace rcas::l0 {

inline constexpr double kDefaultKappa = 0.5;
inline constexpr double kDefaultZeta = 0.001;

/// Thresholds for the surrogate: an N x M matrix, or an N x 1 column for the
/// vector form. Every entry lies in (0, 1).
struct Threshold {
  RMat values;
  double kappa = kDefaultKappa;
  double zeta = kDefaultZeta;

  RVec column(int m) const { return values.col(m); }
};

/// sum_i min(b_i / tau_i, 1), a concave piecewise-linear under-estimator of
/// the number of nonzeros of b.
double phi(const RVec& b, const RVec& tau);

/// 0 where b_i > tau_i, 1/tau_i otherwise (the kink takes 1/tau_i).
RVec phi_subgradient(const RVec& b, const RVec& tau);

/// Gradient of phi(P_l Z c_m, P_l Pi c_m) with respect to Z: nonzero only in
/// column m on the rows of group l.
RMat phi_subgradient_wrt_Z(const RMat& Z, const Threshold& pi, int group, int column, const GroupStructure& groups);

/// Sum of phi_subgradient_wrt_Z over every (group, column). Because the
/// groups partition the rows this is the entrywise subgradient of Z against Pi.
RMat penalty_gradient(const RMat& Z, const Threshold& pi);

/// phi(b0) + g(b0)'(b - b0).
double affine_majorizer(const RVec& b, const RVec& b0, const RVec& tau);

/// Pi_ij = Z_ij - zeta when Z_ij >= kappa, else Z_ij + zeta, clamped to
/// [zeta/2, 1 - zeta/2].
Threshold update_threshold_matrix(const RMat& z_prev, double kappa = kDefaultKappa, double zeta = kDefaultZeta);

/// Elementwise analogue for a selection vector; the result is N x 1.
Threshold update_threshold_vector(const RVec& z_prev, double kappa = kDefaultKappa, double zeta = kDefaultZeta);

/// max over (group, column) of phi(P_l Z c_m, P_l Pi c_m).
double max_group_phi(const RMat& Z, const Threshold& pi, const GroupStructure& groups);

}  // namespace rcas::l0
