#include <random>

#include "doctest.h"
#include "rcas/l0_relax.hpp"

using namespace rcas;
using namespace rcas::l0;

TEST_CASE("phi values") {
  CHECK(phi(RVec::Zero(3), RVec::Constant(3, 0.5)) == 0.0);
  CHECK(phi(RVec::Unit(2, 0), RVec::Constant(2, 0.9)) == doctest::Approx(1.0));
  RVec b(2);
  b << 0.1, 0.2;
  CHECK(phi(b, RVec::Constant(2, 0.5)) == doctest::Approx(0.6));
  CHECK_THROWS_AS(phi(-b, RVec::Constant(2, 0.5)), DomainError);
  CHECK_THROWS_AS(phi(b, RVec::Zero(2)), DomainError);
  CHECK_THROWS_AS(phi(b, RVec::Constant(3, 0.5)), DomainError);
}

TEST_CASE("phi subgradient branches") {
  RVec b(3), tau(3);
  b << 0.8, 0.1, 0.5;
  tau << 0.5, 0.5, 0.5;
  const RVec g = phi_subgradient(b, tau);
  CHECK(g(0) == 0.0);
  CHECK(g(1) == doctest::Approx(2.0));
  CHECK(g(2) == doctest::Approx(2.0));
}

TEST_CASE("subgradient with respect to Z") {
  const auto groups = make_groups(6, 2);
  RMat Z = RMat::Constant(6, 3, 0.9);
  Threshold pi{RMat::Constant(6, 3, 0.5)};
  CHECK(phi_subgradient_wrt_Z(Z, pi, 1, 2, groups).norm() == 0.0);
  Z(3, 2) = 0.2;
  const RMat g = phi_subgradient_wrt_Z(Z, pi, 1, 2, groups);
  CHECK(g(3, 2) == doctest::Approx(2.0));
  CHECK(g.cwiseAbs().sum() == doctest::Approx(2.0));
  CHECK_THROWS_AS(phi_subgradient_wrt_Z(Z, pi, 3, 0, groups), DomainError);
}

TEST_CASE("subgradient with respect to Z matches finite differences away from kinks") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const auto groups = make_groups(8, 4);
  for (int trial = 0; trial < 50; ++trial) {
    RMat Z(8, 2);
    RMat P(8, 2);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 2; ++j) {
        P(i, j) = 0.05 + 0.9 * ud(rng);
        do {
          Z(i, j) = ud(rng);
        } while (std::abs(Z(i, j) - P(i, j)) <= 1e-3);
      }
    const Threshold pi{P};
    const int l = trial % 2, m = (trial / 2) % 2;
    const RMat g = phi_subgradient_wrt_Z(Z, pi, l, m, groups);
    const double h = 1e-7;
    for (int i = 0; i < 8; ++i) {
      RMat Zp = Z;
      Zp(i, m) += h;
      RMat Zm = Z;
      Zm(i, m) = std::max(0.0, Z(i, m) - h);
      const double fp = phi(groups.extract(Zp.col(m), l), groups.extract(P.col(m), l));
      const double fm = phi(groups.extract(Zm.col(m), l), groups.extract(P.col(m), l));
      const double fd = (fp - fm) / (Zp(i, m) - Zm(i, m));
      CHECK(std::abs(fd - g(i, m)) < 1e-6);
    }
  }
}

TEST_CASE("affine majorizer") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    RVec b(4), b0(4), tau(4);
    for (int i = 0; i < 4; ++i) {
      b(i) = ud(rng);
      b0(i) = ud(rng);
      tau(i) = 0.01 + 0.98 * ud(rng);
    }
    if (affine_majorizer(b, b0, tau) < phi(b, tau) - 1e-12) ++violations;
    if (trial == 0) {
      CHECK(affine_majorizer(b0, b0, tau) == doctest::Approx(phi(b0, tau)));
      const RVec b2 = RVec::Constant(4, 0.3);
      const double al = 0.37;
      CHECK(affine_majorizer(al * b + (1 - al) * b2, b0, tau) ==
            doctest::Approx(al * affine_majorizer(b, b0, tau) + (1 - al) * affine_majorizer(b2, b0, tau)));
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("threshold updates") {
  RMat z(1, 3);
  z << 0.7, 0.3, 1.0;
  const auto t = update_threshold_matrix(z, 0.5, 0.001);
  CHECK(t.values(0, 0) == doctest::Approx(0.699));
  CHECK(t.values(0, 1) == doctest::Approx(0.301));
  CHECK(t.values(0, 2) < 1.0);
  CHECK(t.values(0, 2) > 0.0);

  RVec v(3);
  v << 0.5, 0.0, 1.0;
  const auto tv = update_threshold_vector(v);
  CHECK(tv.values(0, 0) == doctest::Approx(0.499));
  CHECK(tv.values(1, 0) == doctest::Approx(0.001));
  CHECK(std::abs(tv.values(2, 0) - 1.0) <= 0.001 + 1e-15);

  RMat outside(1, 2);
  outside << 1.2, -0.3;
  const auto clamped = update_threshold_matrix(outside);
  CHECK(clamped.values(0, 0) <= 1.0 - 0.0005);
  CHECK(clamped.values(0, 1) >= 0.0005);
  CHECK_THROWS_AS(update_threshold_matrix(z, 0.5, 0.6), DomainError);
}

TEST_CASE("entries far above a tiny threshold count exactly one") {
  RVec b(3), tau(3);
  b << 0.9, 0.7, 0.0;
  tau << 1e-5, 3e-7, 1e-5;
  CHECK(l0::phi(b, tau) == 2.0);
}
