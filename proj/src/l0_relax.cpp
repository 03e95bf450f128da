#include "rcas/l0_relax.hpp"

#include <algorithm>

namespace rcas::l0 {

namespace {

void check_args(const RVec& b, const RVec& tau) {
  if (b.size() != tau.size()) throw DomainError("phi: length mismatch");
  if ((b.array() < 0.0).any()) throw DomainError("phi: entries of b must be nonnegative");
  if ((tau.array() <= 0.0).any()) throw DomainError("phi: thresholds must be positive");
}

void check_update_args(double kappa, double zeta) {
  if (!(zeta > 0.0) || !(zeta < kappa) || !(kappa < 1.0)) {
    throw DomainError("threshold update requires 0 < zeta < kappa < 1");
  }
}

double next_threshold(double z, double kappa, double zeta) {
  const double t = z >= kappa ? z - zeta : z + zeta;
  return std::clamp(t, zeta / 2.0, 1.0 - zeta / 2.0);
}

}  // namespace

double phi(const RVec& b, const RVec& tau) {
  check_args(b, tau);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) sum += std::min(b(i), tau(i)) / tau(i);
  return sum;
}

RVec phi_subgradient(const RVec& b, const RVec& tau) {
  check_args(b, tau);
  RVec g(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) g(i) = b(i) > tau(i) ? 0.0 : 1.0 / tau(i);
  return g;
}

RMat phi_subgradient_wrt_Z(const RMat& Z, const Threshold& pi, int group, int column, const GroupStructure& groups) {
  if (Z.rows() != groups.num_antennas() || Z.rows() != pi.values.rows() || Z.cols() != pi.values.cols()) {
    throw DomainError("selection and threshold shapes disagree");
  }
  if (group < 0 || group >= groups.num_groups() || column < 0 || column >= Z.cols()) {
    throw DomainError("group or column index out of range");
  }
  RMat out = RMat::Zero(Z.rows(), Z.cols());
  const RVec b = groups.extract(Z.col(column), group);
  const RVec tau = groups.extract(pi.values.col(column), group);
  out.col(column).segment(groups.first_member(group), groups.group_size()) = phi_subgradient(b, tau);
  return out;
}

RMat penalty_gradient(const RMat& Z, const Threshold& pi) {
  if (Z.rows() != pi.values.rows() || Z.cols() != pi.values.cols()) {
    throw DomainError("selection and threshold shapes disagree");
  }
  RMat g(Z.rows(), Z.cols());
  for (Eigen::Index j = 0; j < Z.cols(); ++j) g.col(j) = phi_subgradient(Z.col(j), pi.values.col(j));
  return g;
}

double affine_majorizer(const RVec& b, const RVec& b0, const RVec& tau) {
  check_args(b, tau);
  return phi(b0, tau) + phi_subgradient(b0, tau).dot(b - b0);
}

Threshold update_threshold_matrix(const RMat& z_prev, double kappa, double zeta) {
  check_update_args(kappa, zeta);
  Threshold t{z_prev.unaryExpr([&](double z) { return next_threshold(z, kappa, zeta); }), kappa, zeta};
  return t;
}

Threshold update_threshold_vector(const RVec& z_prev, double kappa, double zeta) {
  return update_threshold_matrix(RMat(z_prev), kappa, zeta);
}

double max_group_phi(const RMat& Z, const Threshold& pi, const GroupStructure& groups) {
  double worst = 0.0;
  const RMat Zc = Z.cwiseMax(0.0);
  for (int m = 0; m < Z.cols(); ++m) {
    for (int l = 0; l < groups.num_groups(); ++l) {
      worst = std::max(worst, phi(groups.extract(Zc.col(m), l), groups.extract(pi.values.col(m), l)));
    }
  }
  return worst;
}

}  // namespace rcas::l0
