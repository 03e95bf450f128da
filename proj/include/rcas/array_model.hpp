#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rcas/types.hpp"

namespace rcas {

/// Linear array on an integer grid: element n sits at positions[n] * spacing
/// wavelengths. Angles are degrees from broadside.
class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<int> positions, double spacing_wavelengths, double steer_angle_deg);

  /// N contiguous elements at 0..N-1.
  static ArrayGeometry uniform(int num_antennas, double spacing_wavelengths, double steer_angle_deg);

  int num_antennas() const { return static_cast<int>(positions_.size()); }
  const std::vector<int>& positions() const { return positions_; }
  double spacing() const { return spacing_; }
  double steer_angle_deg() const { return steer_angle_deg_; }

  /// Elements `indices` (ascending, into this geometry) as their own array.
  ArrayGeometry subarray(std::span<const int> indices) const;

 private:
  std::vector<int> positions_;
  double spacing_;
  double steer_angle_deg_;
};

/// Contiguous partition of N antennas into L groups of M. Antenna and group
/// indices are zero-based. The group selection operator P_l is realized as a
/// row range, never as an explicit 0/1 matrix.
class GroupStructure {
 public:
  GroupStructure(int num_antennas, int group_size);

  int num_antennas() const { return num_groups_ * group_size_; }
  int num_groups() const { return num_groups_; }
  int group_size() const { return group_size_; }

  int group_of(int antenna) const;
  int first_member(int group) const { return group * group_size_; }
  std::vector<int> members_of(int group) const;

  /// P_l applied to an N x C matrix: rows of group l.
  template <typename Derived>
  auto extract(const Eigen::MatrixBase<Derived>& matrix, int group) const {
    return matrix.middleRows(first_member(group), group_size_);
  }

  /// Inverse of extract over all groups.
  RMat reassemble(std::span<const RMat> blocks) const;

 private:
  int num_groups_;
  int group_size_;
};

GroupStructure make_groups(int num_antennas, int group_size);

/// Evaluation grid over [-90, 90] degrees with a sidelobe-membership mask.
struct AngleGrid {
  std::vector<double> angles;
  std::vector<bool> sidelobe_mask;

  /// Uniform grid with `step_deg` spacing; an angle is a sidelobe angle when
  /// it falls inside any of the closed `regions`.
  static AngleGrid from_regions(std::span<const std::pair<double, double>> regions, double step_deg);

  /// Every angle is a sidelobe angle.
  static AngleGrid sidelobe_only(std::vector<double> angles);

  std::vector<double> sidelobe_angles() const;
  int num_sidelobe() const;
  int size() const { return static_cast<int>(angles.size()); }
};

/// exp(j 2 pi (d/lambda) x_n sin(theta)).
CVec steering_vector(const ArrayGeometry& geom, double theta_deg);

/// Steering vector toward the geometry's steer angle.
inline CVec steering_vector(const ArrayGeometry& geom) {
  return steering_vector(geom, geom.steer_angle_deg());
}

/// N x K matrix whose columns are steering vectors at the sidelobe angles.
CMat manifold_matrix(const ArrayGeometry& geom, const AngleGrid& grid);

/// N x size() matrix over every grid angle.
CMat full_manifold_matrix(const ArrayGeometry& geom, const AngleGrid& grid);

/// Rows `indices` and columns `indices` of a square matrix.
CMat principal_submatrix(const CMat& m, std::span<const int> indices);
CVec gather(const CVec& v, std::span<const int> indices);
/// Zero-filled length-n vector carrying `v` at `indices`.
CVec scatter(const CVec& v, std::span<const int> indices, int n);

}  // namespace rcas
