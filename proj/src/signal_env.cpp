#include "rcas/signal_env.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace rcas {

namespace {

cplx circular_gaussian(std::mt19937_64& rng, std::normal_distribution<double>& nd) {
  constexpr double kScale = 0.70710678118654752440;
  const double re = nd(rng);
  const double im = nd(rng);
  return {kScale * re, kScale * im};
}

CMat interference_manifold(const Scenario& sc, const ArrayGeometry& geom) {
  CMat A(geom.num_antennas(), sc.num_interferences());
  for (int j = 0; j < sc.num_interferences(); ++j) {
    A.col(j) = steering_vector(geom, sc.interferences[static_cast<std::size_t>(j)].angle_deg);
  }
  return A;
}

RVec interference_amplitudes(const Scenario& sc) {
  RVec amp(sc.num_interferences());
  for (int j = 0; j < sc.num_interferences(); ++j) amp(j) = std::sqrt(sc.interferences[static_cast<std::size_t>(j)].power);
  return amp;
}

}  // namespace

void Scenario::validate() const {
  if (!(source_power >= 0.0)) throw DomainError("source power must be nonnegative");
  if (!(noise_power > 0.0)) throw DomainError("noise power must be positive");
  if (!(source_angle_deg >= -90.0 && source_angle_deg <= 90.0)) throw DomainError("source angle outside [-90, 90]");
  for (const auto& i : interferences) {
    if (!(i.power > 0.0)) throw DomainError("interference power must be positive");
    if (!(i.angle_deg >= -90.0 && i.angle_deg <= 90.0)) throw DomainError("interference angle outside [-90, 90]");
  }
  if (correlation) {
    const CMat& C = *correlation;
    const auto J = num_interferences();
    if (C.rows() != J || C.cols() != J) throw DomainError("correlation must be J x J");
    if ((C - C.adjoint()).norm() > 1e-9 * std::max(1.0, C.norm())) throw DomainError("correlation is not Hermitian");
    for (int j = 0; j < J; ++j) {
      if (std::abs(C(j, j) - 1.0) > 1e-9) throw DomainError("correlation diagonal must be one");
    }
    if (J > 0) {
      Eigen::SelfAdjointEigenSolver<CMat> eig(C, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-9) throw DomainError("correlation is not positive semidefinite");
    }
  }
}

const char* to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::theoretical: return "theoretical";
    case CovarianceKind::sample: return "sample";
    case CovarianceKind::augmented: return "augmented";
  }
  return "unknown";
}

CMat interference_noise_covariance(const Scenario& sc, const ArrayGeometry& geom) {
  sc.validate();
  const auto n = geom.num_antennas();
  CMat R = sc.noise_power * CMat::Identity(n, n);
  if (sc.num_interferences() == 0) return R;
  const CMat A = interference_manifold(sc, geom);
  const RVec amp = interference_amplitudes(sc);
  const CMat AD = A * amp.asDiagonal();
  if (sc.correlation) {
    R += AD * (*sc.correlation) * AD.adjoint();
  } else {
    R += AD * AD.adjoint();
  }
  return 0.5 * (R + R.adjoint());
}

CovarianceEstimate theoretical_covariance(const Scenario& sc, const ArrayGeometry& geom) {
  const CVec a0 = steering_vector(geom, sc.source_angle_deg);
  CMat R = interference_noise_covariance(sc, geom) + sc.source_power * a0 * a0.adjoint();
  return {0.5 * (R + R.adjoint()), CovarianceKind::theoretical, 0.0, 0.0};
}

CMat hermitian_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (m + m.adjoint()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed", 0.0);
  const RVec ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();
}

SnapshotBlock synthesize_snapshots(const Scenario& sc, const ArrayGeometry& geom, int T, std::uint64_t seed) {
  if (T < 1) throw DomainError("snapshot count must be at least 1");
  sc.validate();
  const auto n = geom.num_antennas();
  const auto J = sc.num_interferences();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;

  const CVec a0 = steering_vector(geom, sc.source_angle_deg);
  CMat mix;
  if (J > 0) {
    const CMat A = interference_manifold(sc, geom);
    const RVec amp = interference_amplitudes(sc);
    mix = A * amp.asDiagonal();
    if (sc.correlation) mix = mix * hermitian_sqrt(*sc.correlation);
  }
  const double src_amp = std::sqrt(sc.source_power);
  const double noise_amp = std::sqrt(sc.noise_power);

  SnapshotBlock block{CMat(n, T), Mask::Constant(n, T, true)};
  CVec g(J);
  for (int t = 0; t < T; ++t) {
    const cplx s = src_amp * circular_gaussian(rng, nd);
    for (int j = 0; j < J; ++j) g(j) = circular_gaussian(rng, nd);
    CVec y = s * a0;
    if (J > 0) y += mix * g;
    for (int i = 0; i < n; ++i) y(i) += noise_amp * circular_gaussian(rng, nd);
    block.data.col(t) = y;
  }
  return block;
}

CMat sample_covariance(const CMat& data) {
  if (data.cols() == 0) throw DomainError("no samples");
  const CMat R = data * data.adjoint() / static_cast<double>(data.cols());
  return 0.5 * (R + R.adjoint());
}

CMat masked_covariance(const SnapshotBlock& block) {
  const auto n = block.data.rows();
  const RMat act = block.active.cast<double>().matrix();
  const RMat counts = act * act.transpose();
  const CMat sums = block.data * block.data.adjoint();
  CMat R = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (counts(i, j) > 0.0) R(i, j) = sums(i, j) / counts(i, j);
    }
  }
  return 0.5 * (R + R.adjoint());
}

void check_complementary(std::span<const std::vector<int>> arrays, int n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& arr : arrays) {
    for (int i : arr) {
      if (i < 0 || i >= n) throw DomainError("array index out of range");
      ++seen[static_cast<std::size_t>(i)];
    }
  }
  for (int c : seen) {
    if (c != 1) throw DomainError("arrays are not complementary: every antenna must belong to exactly one array");
  }
}

SwitchedData switched_collection(std::span<const std::vector<int>> arrays, const Scenario& sc,
                                 const ArrayGeometry& geom, int T_per_array, std::uint64_t seed) {
  if (T_per_array < 1) throw DomainError("snapshot count must be at least 1");
  check_complementary(arrays, geom.num_antennas());
  const int M = static_cast<int>(arrays.size());
  SnapshotBlock full = synthesize_snapshots(sc, geom, M * T_per_array, seed);
  full.active.setConstant(false);
  for (int m = 0; m < M; ++m) {
    for (int i : arrays[static_cast<std::size_t>(m)]) {
      full.active.row(i).segment(m * T_per_array, T_per_array).setConstant(true);
    }
  }
  for (Eigen::Index i = 0; i < full.data.rows(); ++i) {
    for (Eigen::Index t = 0; t < full.data.cols(); ++t) {
      if (!full.active(i, t)) full.data(i, t) = 0.0;
    }
  }
  CovarianceEstimate est{masked_covariance(full), CovarianceKind::sample, 0.0, 0.0};
  return {std::move(full), std::move(est)};
}

double output_sinr(const CVec& w, const Scenario& sc, const ArrayGeometry& geom) {
  if (w.size() != geom.num_antennas()) throw DomainError("weight length does not match the array");
  if (w.squaredNorm() == 0.0) throw DomainError("weight vector is zero");
  const CVec a0 = steering_vector(geom, sc.source_angle_deg);
  const CMat Rin = interference_noise_covariance(sc, geom);
  const double signal = sc.source_power * std::norm(w.dot(a0));
  const double denom = std::real(w.dot(Rin * w));
  return 10.0 * std::log10(signal / denom);
}

CMat random_correlation(int J, std::mt19937_64& rng) {
  if (J < 0) throw DomainError("negative interference count");
  std::normal_distribution<double> nd;
  CMat G(J, J);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) G(i, j) = circular_gaussian(rng, nd);
  }
  CMat C = G * G.adjoint() + CMat::Identity(J, J);
  const RVec d = C.diagonal().real().cwiseSqrt().cwiseInverse();
  C = d.asDiagonal() * C * d.asDiagonal();
  for (int j = 0; j < J; ++j) C(j, j) = 1.0;
  return 0.5 * (C + C.adjoint());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over (master, index).
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace rcas
