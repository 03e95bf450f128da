#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcas/array_model.hpp"
#include "rcas/beamform.hpp"
#include "rcas/l0_relax.hpp"
#include "rcas/signal_env.hpp"
#include "rcas/socp.hpp"
#include "rcas/types.hpp"

namespace rcas {

struct AdaptiveDesign {
  RVec z;       ///< binary selection, one antenna per group
  CVec w;       ///< combined weights scattered to the full array
  double sinr_db = 0.0;  ///< filled by callers that know the scenario
  RVec init_z;  ///< reweighted-l1 output
  RVec z_relaxed;  ///< last stage-2 iterate before binarization
  std::vector<double> init_trace;  ///< ||z^(k+1) - z^(k)||_2 in stage 1
  std::vector<double> trace;       ///< same in stage 2
  bool converged = true;           ///< false when stage 2 hit the iteration cap

  std::vector<int> selection() const;
};

inline constexpr double kDefaultGamma = 1e-4;

struct RasaOptions {
  double beta = -1.0;  ///< negative selects default_beta
  double rho = 1.0;
  double kappa = l0::kDefaultKappa;
  double zeta = l0::kDefaultZeta;
  double gamma = kDefaultGamma;
  int max_iter = 50;
  double tol = 1e-4;  ///< on ||z^(k+1) - z^(k)||_2
  double solver_tol = socp::kDefaultTol;
};

/// tr(R) / (N tr(A_s A_s^H)): balances the two terms of the combined objective.
double default_beta(const CMat& R, const CMat& As);

/// Switched collection over the complementary set followed by the loading
/// policy; kind = sample.
CovarianceEstimate estimate_full_covariance(std::span<const std::vector<int>> arrays, const Scenario& sc,
                                            const ArrayGeometry& geom, int T, std::uint64_t seed);

/// Decoded layout of one selection subproblem
///   min w^H R w + beta ||w^H A_s - f||^2 + rho penalty' z
///   s.t. w^H a = 1, |w| <= z, and optionally one unit of z per group.
struct SelectionProblem {
  socp::ConeProblem problem;
  socp::ComplexVar w;
  int zbase = 0;
  double offset = 0.0;  ///< constant dropped from the quadratic

  CVec decode_w(const RVec& x) const;
  RVec decode_z(const RVec& x) const;
};

SelectionProblem build_selection_problem(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                                         const DesiredPattern& pattern, double beta, double rho, const RVec& penalty,
                                         const GroupStructure* groups);

/// Reweighted l1 iterations from z = 1 with c = 1 / (z + gamma); stops when
/// ||z^(k+1) - z^(k)||_2 < 1e-4 or after max_iter. The trace receives the
/// step norms.
RVec reweighted_l1_init(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                        const DesiredPattern& pattern, const RasaOptions& options,
                        std::vector<double>* trace = nullptr);

/// Stage 2 from a given start: threshold update, subgradient penalty and
/// group-sum-constrained solve until the step falls below tol. Iterates are
/// appended to `iterates` when given.
AdaptiveDesign rasa_stage_two(const CMat& R, const ArrayGeometry& geom, const GroupStructure& groups,
                              const AngleGrid& grid, const DesiredPattern& pattern, const RVec& z0,
                              const RasaOptions& options, std::vector<RVec>* iterates = nullptr);

/// Reweighted initialization, stage 2, per-group argmax, and combined
/// weights on the selected support.
AdaptiveDesign run_rasa(const CMat& R, const ArrayGeometry& geom, const GroupStructure& groups,
                        const AngleGrid& grid, const DesiredPattern& pattern, const RasaOptions& options);

/// Combined weights of the selection `sel` scattered to the full array.
CVec combined_on_support(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                         const DesiredPattern& pattern, double beta, std::span<const int> sel);

/// Capon weights of the selection `sel` scattered to the full array.
CVec capon_on_support(const CMat& R, const ArrayGeometry& geom, std::span<const int> sel);

}  // namespace rcas
