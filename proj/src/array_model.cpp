#include "rcas/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rcas {

namespace {
constexpr double kAngleEps = 1e-9;
}

ArrayGeometry::ArrayGeometry(std::vector<int> positions, double spacing_wavelengths, double steer_angle_deg)
    : positions_(std::move(positions)), spacing_(spacing_wavelengths), steer_angle_deg_(steer_angle_deg) {
  if (positions_.empty()) throw DomainError("array must contain at least one antenna");
  for (std::size_t i = 1; i < positions_.size(); ++i) {
    if (positions_[i] <= positions_[i - 1]) throw DomainError("antenna positions must be strictly increasing");
  }
  if (!(spacing_ > 0.0)) throw DomainError("element spacing must be positive");
  if (!(steer_angle_deg_ > -90.0 && steer_angle_deg_ < 90.0)) {
    throw DomainError("steer angle must lie in (-90, 90) degrees");
  }
}

ArrayGeometry ArrayGeometry::uniform(int num_antennas, double spacing_wavelengths, double steer_angle_deg) {
  if (num_antennas < 1) throw DomainError("array must contain at least one antenna");
  std::vector<int> pos(static_cast<std::size_t>(num_antennas));
  for (int n = 0; n < num_antennas; ++n) pos[static_cast<std::size_t>(n)] = n;
  return {std::move(pos), spacing_wavelengths, steer_angle_deg};
}

ArrayGeometry ArrayGeometry::subarray(std::span<const int> indices) const {
  std::vector<int> pos;
  pos.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || i >= num_antennas()) throw DomainError("subarray index out of range");
    pos.push_back(positions_[static_cast<std::size_t>(i)]);
  }
  return {std::move(pos), spacing_, steer_angle_deg_};
}

GroupStructure::GroupStructure(int num_antennas, int group_size) {
  if (num_antennas < 1 || group_size < 1) throw ConfigError("group_size", "sizes must be positive");
  if (num_antennas % group_size != 0) {
    throw ConfigError("group_size", "group size " + std::to_string(group_size) + " does not divide " +
                                        std::to_string(num_antennas) + " antennas");
  }
  num_groups_ = num_antennas / group_size;
  group_size_ = group_size;
}

int GroupStructure::group_of(int antenna) const {
  if (antenna < 0 || antenna >= num_antennas()) throw DomainError("antenna index out of range");
  return antenna / group_size_;
}

std::vector<int> GroupStructure::members_of(int group) const {
  if (group < 0 || group >= num_groups_) throw DomainError("group index out of range");
  std::vector<int> out(static_cast<std::size_t>(group_size_));
  for (int i = 0; i < group_size_; ++i) out[static_cast<std::size_t>(i)] = first_member(group) + i;
  return out;
}

RMat GroupStructure::reassemble(std::span<const RMat> blocks) const {
  if (static_cast<int>(blocks.size()) != num_groups_) throw DomainError("expected one block per group");
  const auto cols = blocks.front().cols();
  RMat out(num_antennas(), cols);
  for (int l = 0; l < num_groups_; ++l) {
    const RMat& b = blocks[static_cast<std::size_t>(l)];
    if (b.rows() != group_size_ || b.cols() != cols) throw DomainError("group block has wrong shape");
    out.middleRows(first_member(l), group_size_) = b;
  }
  return out;
}

GroupStructure make_groups(int num_antennas, int group_size) { return {num_antennas, group_size}; }

AngleGrid AngleGrid::from_regions(std::span<const std::pair<double, double>> regions, double step_deg) {
  if (!(step_deg > 0.0)) throw ConfigError("grid_step_deg", "grid step must be positive");
  AngleGrid grid;
  const int count = static_cast<int>(std::floor(180.0 / step_deg + kAngleEps));
  for (int i = 0; i <= count; ++i) {
    const double theta = -90.0 + i * step_deg;
    bool in_sidelobe = false;
    for (const auto& [lo, hi] : regions) {
      if (theta >= lo - kAngleEps && theta <= hi + kAngleEps) in_sidelobe = true;
    }
    grid.angles.push_back(theta);
    grid.sidelobe_mask.push_back(in_sidelobe);
  }
  return grid;
}

AngleGrid AngleGrid::sidelobe_only(std::vector<double> angles) {
  if (!std::is_sorted(angles.begin(), angles.end())) throw DomainError("grid angles must be sorted");
  AngleGrid grid;
  grid.sidelobe_mask.assign(angles.size(), true);
  grid.angles = std::move(angles);
  return grid;
}

std::vector<double> AngleGrid::sidelobe_angles() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (sidelobe_mask[k]) out.push_back(angles[k]);
  }
  return out;
}

int AngleGrid::num_sidelobe() const {
  return static_cast<int>(std::count(sidelobe_mask.begin(), sidelobe_mask.end(), true));
}

CVec steering_vector(const ArrayGeometry& geom, double theta_deg) {
  if (!(theta_deg >= -90.0 - kAngleEps && theta_deg <= 90.0 + kAngleEps)) {
    throw DomainError("angle " + std::to_string(theta_deg) + " outside [-90, 90] degrees");
  }
  const double phase_per_unit = 2.0 * kPi * geom.spacing() * std::sin(deg2rad(theta_deg));
  CVec a(geom.num_antennas());
  for (int n = 0; n < geom.num_antennas(); ++n) {
    a(n) = std::polar(1.0, phase_per_unit * geom.positions()[static_cast<std::size_t>(n)]);
  }
  return a;
}

CMat manifold_matrix(const ArrayGeometry& geom, const AngleGrid& grid) {
  const auto angles = grid.sidelobe_angles();
  if (angles.empty()) throw DomainError("sidelobe region is empty");
  CMat out(geom.num_antennas(), static_cast<Eigen::Index>(angles.size()));
  for (std::size_t k = 0; k < angles.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = steering_vector(geom, angles[k]);
  return out;
}

CMat full_manifold_matrix(const ArrayGeometry& geom, const AngleGrid& grid) {
  CMat out(geom.num_antennas(), grid.size());
  for (int k = 0; k < grid.size(); ++k) out.col(k) = steering_vector(geom, grid.angles[static_cast<std::size_t>(k)]);
  return out;
}

CMat principal_submatrix(const CMat& m, std::span<const int> indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  CMat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  }
  return out;
}

CVec gather(const CVec& v, std::span<const int> indices) {
  CVec out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(indices[i]);
  return out;
}

CVec scatter(const CVec& v, std::span<const int> indices, int n) {
  CVec out = CVec::Zero(n);
  for (std::size_t i = 0; i < indices.size(); ++i) out(indices[i]) = v(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace rcas
