#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rcas/array_model.hpp"
#include "rcas/l0_relax.hpp"
#include "rcas/socp.hpp"
#include "rcas/types.hpp"

namespace rcas {

/// Geometry, grouping and template shared by every complementary-split solve.
/// The number of arrays M equals the group size.
struct SplitSetup {
  ArrayGeometry geom;
  GroupStructure groups;
  AngleGrid grid;
  RRow magnitude;  ///< desired sidelobe magnitude f_d over the K sidelobe angles

  int num_arrays() const { return groups.group_size(); }
};

struct SplitDesign {
  RMat Z;         ///< relaxed selection, N x M
  RMat Z_binary;  ///< one antenna per group per array, each antenna used once
  CMat W;         ///< relaxed weights, N x M
  std::vector<double> deviation_trace;  ///< ||W^H A_s - F||_F per iteration
  std::vector<double> z_step_trace;     ///< ||Z^(k+1) - Z^(k)||_F per iteration
  std::vector<double> psl_per_array;    ///< dB, after re-fitting on the binary support
  double objective = 0.0;               ///< final ||W^H A_s - F||_F
  int iterations = 0;
  int restart = -1;
  bool converged = false;

  /// Ascending antenna indices of array m.
  std::vector<int> selection(int m) const;
  double max_psl() const;
};

struct DcsaOptions {
  double rho = 1.0;
  double kappa = l0::kDefaultKappa;
  double zeta = l0::kDefaultZeta;
  int restarts = 10;
  std::uint64_t seed = 1;
  int max_outer_iter = 50;
  double tol = 1e-5;  ///< on ||W^(k+1) - W^(k)||_F
  double solver_tol = socp::kDefaultTol;
  int threads = 0;  ///< 0 picks the hardware concurrency
};

/// Decoded layout of one penalized subproblem.
struct RpTauProblem {
  socp::ConeProblem problem;
  std::vector<socp::ComplexVar> w;  ///< one per array
  std::vector<int> z;               ///< variable of Z(i, m) at i * M + m
  int epigraph = -1;

  CMat decode_W(const RVec& x) const;
  /// Clamped to [0, 1] to absorb solver round-off.
  RMat decode_Z(const RVec& x) const;
};

/// min ||W^H A_s - F||_F + rho <G, Z> subject to W^H a = 1, |W| <= Z,
/// group-column sums of Z equal 1, row sums equal 1, Z >= 0, with G the
/// surrogate subgradient at (Z_prev, Pi). F is M x K.
RpTauProblem build_rp_tau(const RMat& Z_prev, const l0::Threshold& Pi, double rho, const CMat& F,
                          const SplitSetup& setup);

/// The objective above evaluated at a point.
double rp_tau_objective(const CMat& W, const RMat& Z, const RMat& Z_prev, const l0::Threshold& Pi, double rho,
                        const CMat& F, const SplitSetup& setup);

/// One pass of the iteration from a given start. The iterates (Z^(0), Z^(1),
/// ...) and thresholds (Pi^(0), ...) are kept when `keep_iterates`.
struct DcsaRun {
  SplitDesign design;
  std::vector<RMat> iterates;
  std::vector<RMat> thresholds;
  socp::SolveStatus last_status = socp::SolveStatus::optimal;
};

DcsaRun run_dcsa_from(const SplitSetup& setup, const RMat& Z0, const DcsaOptions& options, bool keep_iterates = false);

/// Thrown when no restart reaches a binary complementary selection; carries
/// the best fractional iterate.
class DesignFailure : public std::runtime_error {
 public:
  DesignFailure(const std::string& what, SplitDesign best) : std::runtime_error(what), best_(std::move(best)) {}
  const SplitDesign& best() const { return best_; }

 private:
  SplitDesign best_;
};

/// Z^(0) of restart `restart`: entries uniform in [0, 1].
RMat restart_start(const SplitSetup& setup, std::uint64_t seed, int restart);

/// Random restarts of run_dcsa_from from Z^(0) uniform in [0, 1]; keeps the
/// lowest final objective among the restarts that end binary.
SplitDesign run_dcsa(const SplitSetup& setup, const DcsaOptions& options);

/// Per group and array, the largest entry becomes 1. Groups where two arrays
/// claim the same antenna are resolved by the assignment of maximal Z mass.
RMat binarize(const RMat& Z, const GroupStructure& groups);

/// True when every entry is within `tol` of 0 or 1.
bool is_near_binary(const RMat& Z, double tol = 1e-2);

/// Each antenna in exactly one array and each array holding one antenna per group.
bool is_complementary_selection(const RMat& Z, const GroupStructure& groups);

/// Minimax-refit PSL (dB) of each array of a binary selection.
std::vector<double> split_psl(const RMat& Z_binary, const SplitSetup& setup);

}  // namespace rcas
