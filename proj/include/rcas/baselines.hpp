#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcas/array_model.hpp"
#include "rcas/beamform.hpp"
#include "rcas/signal_env.hpp"
#include "rcas/types.hpp"

namespace rcas {

/// How a fixed geometry is weighted before its PSL is read.
enum class PslFit { minimax, least_squares };

struct SplitEntry {
  std::uint64_t bits = 0;  ///< bit l set: array 0 takes the second antenna of group l
  std::vector<int> first;
  std::vector<int> second;
  double psl_first = 0.0;
  double psl_second = 0.0;
  double max_psl() const { return std::max(psl_first, psl_second); }
};

struct SplitRanking {
  std::vector<SplitEntry> entries;  ///< ascending max PSL, ties by bits
  const SplitEntry& best() const { return entries.front(); }
  const SplitEntry& worst() const { return entries.back(); }
};

inline constexpr int kMaxSplitGroups = 20;

/// Every unordered complementary pair of a two-antenna-per-group split
/// (2^(L-1) of them), each array fitted on its own and ranked by the larger
/// PSL. The last group always gives its first antenna to array 0.
SplitRanking enumerate_splittings(const ArrayGeometry& geom, const GroupStructure& groups, const AngleGrid& grid,
                                  const RRow& magnitude, PslFit fit = PslFit::minimax, int threads = 0);

/// Antenna indices of the array with one antenna per group chosen by the
/// base-M digits of `code` (digit l picks the member of group l).
std::vector<int> selection_from_code(std::uint64_t code, const GroupStructure& groups);

enum class BeamformerKind { capon, combined };

const char* to_string(BeamformerKind kind);

struct AdaptiveEntry {
  std::uint64_t code = 0;
  double sinr_db = 0.0;
};

struct AdaptiveRanking {
  std::vector<AdaptiveEntry> entries;  ///< descending SINR, ties by code
  std::vector<int> best_selection;
  double best_sinr_db = 0.0;
};

struct AdaptiveOracleSetup {
  BeamformerKind kind = BeamformerKind::capon;
  const AngleGrid* grid = nullptr;          ///< required for combined
  const DesiredPattern* pattern = nullptr;  ///< required for combined
  double beta = 0.0;
};

inline constexpr std::uint64_t kMaxAdaptiveSelections = std::uint64_t{1} << 20;

/// Brute force over all M^L one-per-group selections with weights computed
/// on the theoretical covariance of `sc`.
AdaptiveRanking enumerate_adaptive(const ArrayGeometry& geom, const GroupStructure& groups, const Scenario& sc,
                                   const AdaptiveOracleSetup& setup, int threads = 0);

/// Inner level 0..N1-1 and outer level (N1+1) k - 1 for k = 1..N2.
std::vector<int> nested_positions(int inner, int outer);

/// Two-level nested array whose last element sits at aperture - 1, using as
/// many of `budget` antennas as such a geometry allows.
std::vector<int> nested_array(int budget, int aperture);

/// Lags 0..max present in the difference set of `positions`.
std::vector<bool> coarray_lags(std::span<const int> positions);

/// Hermitian Toeplitz N x N covariance from the lag averages of a sparse
/// covariance, with eigenvalues clipped at zero. Throws DomainError naming
/// the missing lags when the coarray has holes below N.
CovarianceEstimate coarray_augment(const CMat& R_sparse, std::span<const int> positions, int N);

}  // namespace rcas
