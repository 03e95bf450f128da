#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "rcas/array_model.hpp"

using namespace rcas;

namespace {
const std::vector<std::pair<double, double>> kRegion{{-90.0, -12.0}, {12.0, 90.0}};
}

TEST_CASE("steering vector basics") {
  const auto g = ArrayGeometry::uniform(8, 0.25, 0.0);
  const CVec a = steering_vector(g, 0.0);
  for (int n = 0; n < 8; ++n) CHECK(std::abs(a(n) - 1.0) < 1e-15);

  const ArrayGeometry two({0, 1}, 0.25, 0.0);
  const CVec b = steering_vector(two, 90.0);
  CHECK(std::abs(b(0) - 1.0) < 1e-15);
  CHECK(std::abs(b(1) - cplx(0.0, 1.0)) < 1e-15);

  CHECK_THROWS_AS(steering_vector(g, 91.0), DomainError);
  CHECK_THROWS_AS(steering_vector(g, -90.5), DomainError);
}

TEST_CASE("steering vector matches high-precision reference") {
  const auto g = ArrayGeometry::uniform(16, 0.25, 0.0);
  const CVec a30 = steering_vector(g, 30.0);
  CHECK(std::abs(a30(1) - cplx(0.7071067811865475244, 0.7071067811865475244)) < 1e-14);
  CHECK(std::abs(a30(5) - cplx(-0.7071067811865475244, -0.7071067811865475244)) < 1e-14);
  CHECK(std::abs(a30(11) - cplx(-0.7071067811865475244, 0.7071067811865475244)) < 1e-14);
  CHECK(std::abs(a30(15) - cplx(0.7071067811865475244, -0.7071067811865475244)) < 1e-14);
  const CVec a = steering_vector(g, 37.3);
  CHECK(std::abs(a(1) - cplx(0.58014929553111147395, 0.81451015640982346216)) < 1e-14);
  CHECK(std::abs(a(7) - cplx(0.92866271963219850632, 0.37092526628059279583)) < 1e-14);
  CHECK(std::abs(a(15) - cplx(-0.14063064103518095318, 0.99006213077868708017)) < 1e-14);
  for (int n = 0; n < 16; ++n) CHECK(std::abs(std::abs(a(n)) - 1.0) < 1e-15);
  CHECK(std::abs(a.squaredNorm() - 16.0) < 1e-12);
}

TEST_CASE("geometry invariants are enforced") {
  CHECK_THROWS_AS(ArrayGeometry({0, 2, 1}, 0.25, 0.0), DomainError);
  CHECK_THROWS_AS(ArrayGeometry({0, 1}, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(ArrayGeometry({0, 1}, 0.25, 90.0), DomainError);
  const auto g = ArrayGeometry::uniform(6, 0.5, 10.0);
  const int idx[] = {1, 4};
  const auto sub = g.subarray(idx);
  CHECK(sub.positions() == std::vector<int>{1, 4});
  CHECK(sub.steer_angle_deg() == 10.0);
}

TEST_CASE("groups") {
  const auto g16 = make_groups(16, 2);
  CHECK(g16.num_groups() == 8);
  CHECK(g16.members_of(0) == std::vector<int>{0, 1});
  CHECK(g16.members_of(7) == std::vector<int>{14, 15});
  CHECK(g16.group_of(5) == 2);
  CHECK(make_groups(32, 2).num_groups() == 16);
  const auto one = make_groups(4, 4);
  CHECK(one.num_groups() == 1);
  CHECK(one.members_of(0) == std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(make_groups(16, 3), ConfigError);
  try {
    make_groups(10, 4);
  } catch (const ConfigError& e) {
    CHECK(e.field() == "group_size");
  }
}

TEST_CASE("group extraction and reassembly round-trip") {
  const auto groups = make_groups(12, 3);
  const RMat Z = RMat::Random(12, 3);
  std::vector<RMat> blocks;
  for (int l = 0; l < groups.num_groups(); ++l) {
    RMat blk = groups.extract(Z, l);
    CHECK(blk.rows() == 3);
    CHECK(blk(0, 0) == Z(3 * l, 0));
    blocks.push_back(blk);
  }
  CHECK((groups.reassemble(blocks) - Z).norm() == 0.0);
}

TEST_CASE("angle grid and manifold") {
  const auto grid = AngleGrid::from_regions(kRegion, 1.0);
  CHECK(grid.size() == 181);
  CHECK(grid.num_sidelobe() == 158);
  CHECK(grid.angles.front() == -90.0);
  CHECK(grid.angles.back() == 90.0);
  for (std::size_t k = 0; k < grid.angles.size(); ++k) {
    CHECK(grid.sidelobe_mask[k] == (std::abs(grid.angles[k]) >= 12.0));
  }

  const auto g = ArrayGeometry::uniform(16, 0.25, 0.0);
  const CMat As = manifold_matrix(g, grid);
  CHECK(As.cols() == 158);
  const auto sl = grid.sidelobe_angles();
  for (int k = 0; k < 158; k += 17) CHECK((As.col(k) - steering_vector(g, sl[static_cast<std::size_t>(k)])).norm() < 1e-15);
  CHECK((As.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);

  const CMat gram = As * As.adjoint();
  CHECK((gram - gram.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<CMat> eig(gram, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10 * eig.eigenvalues().maxCoeff());

  const auto single = AngleGrid::sidelobe_only({0.0});
  const CMat one = manifold_matrix(g, single);
  CHECK(one.cols() == 1);
  CHECK((one.col(0) - CVec::Ones(16)).norm() < 1e-15);
}

TEST_CASE("manifold columns follow grid order") {
  const auto g = ArrayGeometry::uniform(5, 0.25, 0.0);
  const CMat A = manifold_matrix(g, AngleGrid::sidelobe_only({-40.0, 10.0, 70.0}));
  const CMat B = manifold_matrix(g, AngleGrid::sidelobe_only({10.0, 70.0}));
  CHECK((A.rightCols(2) - B).norm() == 0.0);
}

TEST_CASE("gather, scatter, principal submatrix") {
  const CVec v = CVec::LinSpaced(6, 0.0, 5.0);
  const int idx[] = {1, 4};
  const CVec g = gather(v, idx);
  CHECK(g(1) == cplx(4.0, 0.0));
  const CVec s = scatter(g, idx, 6);
  CHECK(s(0) == cplx(0.0, 0.0));
  CHECK(s(4) == cplx(4.0, 0.0));
  CMat m = CMat::Random(6, 6);
  const CMat p = principal_submatrix(m, idx);
  CHECK(p(1, 0) == m(4, 1));
}
