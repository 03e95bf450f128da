#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "rcas/beamform.hpp"
#include "rcas/signal_env.hpp"

using namespace rcas;

namespace {

Scenario small_scenario() {
  Scenario sc;
  for (double a : {-28.0, -12.0, 10.0, 25.0}) sc.interferences.push_back({a, 100.0});
  return sc;
}

}  // namespace

TEST_CASE("theoretical covariance") {
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  Scenario empty;
  empty.source_power = 0.0;
  CHECK((theoretical_covariance(empty, g).matrix - CMat::Identity(8, 8)).norm() < 1e-15);

  const auto sc = small_scenario();
  const auto R = theoretical_covariance(sc, g).matrix;
  for (int i = 0; i < 8; ++i) CHECK(std::abs(R(i, i) - cplx(1.0 + 400.0 + 1.0, 0.0)) < 1e-9);
  CHECK((R - R.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<CMat> eig(R, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= 1.0 - 1e-9);

  const auto g16 = ArrayGeometry::uniform(16, 0.25, 0.0);
  const CVec a0 = steering_vector(g16);
  const CMat J = theoretical_covariance(sc, g16).matrix - CMat::Identity(16, 16) - a0 * a0.adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> ej(J, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (int i = 0; i < 16; ++i) rank += ej.eigenvalues()(i) > 1e-8 * ej.eigenvalues().maxCoeff();
  CHECK(rank == 4);
}

TEST_CASE("correlated interference covariance") {
  std::mt19937_64 rng(5);
  auto sc = small_scenario();
  const CMat C = random_correlation(4, rng);
  CHECK((C - C.adjoint()).norm() < 1e-14);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(C(j, j) - 1.0) < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMat> eig(C, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
  sc.correlation = C;
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  const CMat R = theoretical_covariance(sc, g).matrix;
  Eigen::SelfAdjointEigenSolver<CMat> er(R, Eigen::EigenvaluesOnly);
  CHECK(er.eigenvalues().minCoeff() >= 1.0 - 1e-9);
  CHECK((R - R.adjoint()).norm() < 1e-12);

  CMat bad = C;
  bad(0, 1) = 5.0;
  bad(1, 0) = 5.0;
  sc.correlation = bad;
  CHECK_THROWS_AS(synthesize_snapshots(sc, g, 10, 1), DomainError);
}

TEST_CASE("snapshot synthesis") {
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  const auto sc = small_scenario();
  const auto one = synthesize_snapshots(sc, g, 1, 42);
  CHECK(one.sample_count() == 1);
  CHECK(one.active.all());
  const auto a = synthesize_snapshots(sc, g, 50, 42);
  const auto b = synthesize_snapshots(sc, g, 50, 42);
  CHECK((a.data.array() == b.data.array()).all());
  CHECK_THROWS_AS(synthesize_snapshots(sc, g, 0, 1), DomainError);
}

TEST_CASE("sample covariance converges to the model") {
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  auto sc = small_scenario();
  std::mt19937_64 rng(9);
  sc.correlation = random_correlation(4, rng);
  const CMat R = theoretical_covariance(sc, g).matrix;
  const auto big = synthesize_snapshots(sc, g, 100000, 123);
  CHECK((sample_covariance(big.data) - R).norm() < 0.05 * R.norm());

  double prev = std::numeric_limits<double>::infinity();
  for (int T : {100, 1000, 10000}) {
    double err = 0.0;
    for (int s = 0; s < 10; ++s) err += (sample_covariance(synthesize_snapshots(sc, g, T, derive_seed(77, s)).data) - R).norm();
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("switched collection") {
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  const auto sc = small_scenario();
  const std::vector<std::vector<int>> full{{0, 1, 2, 3, 4, 5, 6, 7}};
  const auto single = switched_collection(full, sc, g, 64, 3);
  CHECK((single.covariance.matrix - sample_covariance(synthesize_snapshots(sc, g, 64, 3).data)).norm() < 1e-12);

  const std::vector<std::vector<int>> pair{{0, 3, 4, 7}, {1, 2, 5, 6}};
  const auto sw = switched_collection(pair, sc, g, 500, 4);
  CHECK(sw.block.sample_count() == 1000);
  for (int i = 0; i < 8; ++i) CHECK(sw.block.active.row(i).count() == 500);
  for (int t = 0; t < 1000; ++t) {
    for (int i = 0; i < 8; ++i) {
      if (!sw.block.active(i, t)) CHECK(sw.block.data(i, t) == cplx(0.0, 0.0));
    }
  }
  CHECK(sw.covariance.matrix(0, 1) == cplx(0.0, 0.0));
  CHECK(sw.covariance.matrix(0, 3) != cplx(0.0, 0.0));
  double diag = 0.0;
  for (int t = 500; t < 1000; ++t) diag += std::norm(sw.block.data(1, t));
  CHECK(std::abs(sw.covariance.matrix(1, 1).real() - diag / 500.0) < 1e-9);

  const std::vector<std::vector<int>> overlap{{0, 1, 2, 3}, {3, 4, 5, 6, 7}};
  CHECK_THROWS_AS(switched_collection(overlap, sc, g, 10, 1), DomainError);
  const std::vector<std::vector<int>> missing{{0, 1, 2, 3}, {4, 5, 6}};
  CHECK_THROWS_AS(switched_collection(missing, sc, g, 10, 1), DomainError);
}

TEST_CASE("output SINR") {
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  Scenario clean;
  const CVec w = steering_vector(g) / 8.0;
  CHECK(output_sinr(w, clean, g) == doctest::Approx(10.0 * std::log10(8.0)).epsilon(1e-12));
  const auto sc = small_scenario();
  const CVec v = CVec::Random(8);
  CHECK(output_sinr(v, sc, g) == doctest::Approx(output_sinr(cplx(-2.5, 0.7) * v, sc, g)).epsilon(1e-12));
  CHECK_THROWS_AS(output_sinr(CVec::Zero(8), sc, g), DomainError);
}

TEST_CASE("full-array Capon beats every regularized 8-element selection") {
  const auto g = ArrayGeometry::uniform(16, 0.25, 0.0);
  const auto sc = small_scenario();
  const CMat R = theoretical_covariance(sc, g).matrix;
  const double full = output_sinr(capon_weights(R, g).w, sc, g);
  double best = -1e9;
  for (int bits = 0; bits < 256; ++bits) {
    std::vector<int> sel;
    for (int l = 0; l < 8; ++l) sel.push_back(2 * l + ((bits >> l) & 1));
    const auto sub = g.subarray(sel);
    best = std::max(best, output_sinr(capon_weights(principal_submatrix(R, sel), sub).w, sc, sub));
  }
  CHECK(full > best);
}

TEST_CASE("derived seeds are distinct and stable") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
