#pragma once

#include <vector>

#include "rcas/array_model.hpp"
#include "rcas/signal_env.hpp"
#include "rcas/types.hpp"

namespace rcas {

/// f = f_d (.) f_p over the K sidelobe angles.
struct DesiredPattern {
  RRow magnitude;
  CRow phase;

  /// Constant level (dB, amplitude) with all-ones phase.
  static DesiredPattern uniform(int K, double level_db);

  CRow complex() const { return magnitude.cast<cplx>().cwiseProduct(phase); }
  int size() const { return static_cast<int>(magnitude.size()); }
};

/// w^H a(theta) over every grid angle.
struct Beampattern {
  AngleGrid grid;
  CVec response;
  cplx steer_gain;

  /// |response| / |steer_gain| in dB.
  RVec normalized_db() const;
};

/// Weights plus the diagonal loading that had to be added (0 when none).
struct Weights {
  CVec w;
  double loading = 0.0;
};

inline constexpr double kLoadingConditionLimit = 1e12;
inline constexpr double kLoadingFactor = 1e-8;

/// Loads Q with 1e-8 tr(Q)/n on the diagonal when its condition number
/// exceeds 1e12; returns the amount added.
double apply_loading_policy(CMat& Q);

/// argmin w^H Q w - 2 Re(w^H q) subject to w^H a = 1.
Weights constrained_quadratic(CMat Q, const CVec& q, const CVec& a);

/// The bordered closed form Rb^{-1} C (C^H Rb^{-1} C)^{-1} g over w~ = [1, w],
/// with C = [[-1, a], e] and g = [0, 1]. Rb must be (n+1) x (n+1) invertible.
CVec bordered_weights(const CMat& Rb, const CVec& a);

/// min ||w^H A_s - f||^2 subject to w^H a(theta0) = 1.
Weights quiescent_weights(const ArrayGeometry& geom, const AngleGrid& grid, const DesiredPattern& pattern);

/// f / |f| entrywise; zero entries map to 1.
CRow phase_update(const CRow& response);

/// R^{-1} a / (a^H R^{-1} a), with diagonal loading per the policy.
Weights capon_weights(const CMat& R, const ArrayGeometry& geom);

/// min w^H R w + beta ||w^H A_s - f||^2 subject to w^H a(theta0) = 1.
Weights combined_weights(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                         const DesiredPattern& pattern, double beta);

/// w^H R w + beta ||w^H A_s - f||^2.
double combined_objective(const CVec& w, const CMat& R, const CMat& As, const CRow& f, double beta);

Beampattern evaluate_pattern(const CVec& w, const ArrayGeometry& geom, const AngleGrid& grid);

/// Max over sidelobe angles of 20 log10(|response| / |steer_gain|).
double peak_sidelobe_level(const Beampattern& bp);

/// Convenience: PSL of w on geom over the grid's sidelobe region.
double peak_sidelobe_level(const CVec& w, const ArrayGeometry& geom, const AngleGrid& grid);

inline constexpr int kPhaseMaxIter = 50;
inline constexpr double kPhaseTol = 1e-6;

struct PatternFit {
  CVec w;
  DesiredPattern pattern;  ///< final phase
  std::vector<double> trace;  ///< objective per iteration
  int iterations = 0;
  double loading = 0.0;
};

/// Alternates quiescent_weights and phase_update from f_p = 1 until the
/// deviation || |w^H A_s| - f_d || decreases by less than 1e-6, or 50 times.
PatternFit fit_quiescent(const ArrayGeometry& geom, const AngleGrid& grid, const RRow& magnitude,
                         int max_iter = kPhaseMaxIter, double tol = kPhaseTol);

/// Same alternation for the combined beamformer; the trace holds the combined
/// objective, which is non-increasing.
PatternFit fit_combined(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid, const RRow& magnitude,
                        double beta, int max_iter = kPhaseMaxIter, double tol = kPhaseTol);

/// min t subject to |w^H a(theta_k)| <= t over the sidelobe angles and
/// w^H a(theta0) = 1; the minimum-PSL weights for a fixed geometry.
CVec minimax_weights(const ArrayGeometry& geom, const AngleGrid& grid);

/// || |w^H A_s| - f_d ||.
double pattern_deviation(const CVec& w, const CMat& As, const RRow& magnitude);

}  // namespace rcas
