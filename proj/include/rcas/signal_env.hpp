#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "rcas/array_model.hpp"
#include "rcas/types.hpp"

namespace rcas {

struct Interference {
  double angle_deg = 0.0;
  double power = 1.0;  ///< linear
};

/// Narrowband far-field scenario. Powers are linear.
struct Scenario {
  double source_angle_deg = 0.0;
  double source_power = 1.0;  ///< zero means no desired signal
  std::vector<Interference> interferences;
  double noise_power = 1.0;
  /// J x J interference correlation coefficients (Hermitian PSD, unit diagonal).
  std::optional<CMat> correlation;

  int num_interferences() const { return static_cast<int>(interferences.size()); }
  /// Throws DomainError on nonpositive powers or a malformed correlation.
  void validate() const;
};

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// N x T snapshot matrix; `active(n, t)` is false where antenna n was switched
/// off at sample t, and those entries of `data` are exactly zero.
struct SnapshotBlock {
  CMat data;
  Mask active;

  int sample_count() const { return static_cast<int>(data.cols()); }
};

enum class CovarianceKind { theoretical, sample, augmented };

const char* to_string(CovarianceKind kind);

struct CovarianceEstimate {
  CMat matrix;
  CovarianceKind kind = CovarianceKind::theoretical;
  /// Diagonal loading that was added, zero when none.
  double loading = 0.0;
  /// Largest negative eigenvalue magnitude removed by PSD repair.
  double psd_clip = 0.0;
};

/// sigma_s^2 a0 a0^H + A_J D C D A_J^H + sigma_n^2 I, with D = diag(sigma_j)
/// and C the correlation (identity when absent).
CovarianceEstimate theoretical_covariance(const Scenario& sc, const ArrayGeometry& geom);

/// The interference-plus-noise part of theoretical_covariance.
CMat interference_noise_covariance(const Scenario& sc, const ArrayGeometry& geom);

/// Hermitian square root of a Hermitian PSD matrix (eigenvalues clipped at 0).
CMat hermitian_sqrt(const CMat& m);

/// Draws T i.i.d. snapshots a0 s + A_J D C^{1/2} g + n with circular complex
/// Gaussian s, g, n. Deterministic for a given seed.
SnapshotBlock synthesize_snapshots(const Scenario& sc, const ArrayGeometry& geom, int T, std::uint64_t seed);

/// (1/T) Y Y^H, Hermitian-symmetrized.
CMat sample_covariance(const CMat& data);

/// Covariance from masked data: each entry is averaged over the samples in
/// which both antennas were active; entries never co-active are zero.
CMat masked_covariance(const SnapshotBlock& block);

struct SwitchedData {
  SnapshotBlock block;
  CovarianceEstimate covariance;
};

/// Each array (ascending antenna indices into geom) is active in turn for
/// `T_per_array` samples. The arrays must be disjoint and cover every antenna.
SwitchedData switched_collection(std::span<const std::vector<int>> arrays, const Scenario& sc,
                                 const ArrayGeometry& geom, int T_per_array, std::uint64_t seed);

/// Throws DomainError unless `arrays` partition 0..n-1.
void check_complementary(std::span<const std::vector<int>> arrays, int n);

/// 10 log10(sigma_s^2 |w^H a0|^2 / (w^H R_{i+n} w)). `w` has one entry per
/// antenna of geom.
double output_sinr(const CVec& w, const Scenario& sc, const ArrayGeometry& geom);

/// D^{-1/2} (G G^H + I) D^{-1/2} with G a J x J complex Gaussian matrix and D
/// the diagonal of G G^H + I.
CMat random_correlation(int J, std::mt19937_64& rng);

/// Seed of the i-th independent stream derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rcas
