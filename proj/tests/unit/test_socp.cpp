#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rcas/socp.hpp"

using namespace rcas;
using namespace rcas::socp;

namespace {

// min c'x s.t. G x <= h by enumerating every vertex (n active rows).
double lp_vertex_oracle(const RMat& G, const RVec& h, const RVec& c) {
  const int n = static_cast<int>(G.cols());
  const int m = static_cast<int>(G.rows());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      RMat Gs(n, n);
      RVec hs(n);
      for (int i = 0; i < n; ++i) {
        Gs.row(i) = G.row(idx[static_cast<std::size_t>(i)]);
        hs(i) = h(idx[static_cast<std::size_t>(i)]);
      }
      Eigen::FullPivLU<RMat> lu(Gs);
      if (lu.rank() < n) return;
      const RVec x = lu.solve(hs);
      if (((G * x - h).array() <= 1e-9).all()) best = std::min(best, c.dot(x));
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

ConeProblem lp_problem(const RMat& G, const RVec& h, const RVec& c) {
  ConeBuilder b;
  const int x = b.add_variables(static_cast<int>(c.size()));
  for (Eigen::Index j = 0; j < c.size(); ++j) b.add_cost(x + static_cast<int>(j), c(j));
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    AffineExpr e = AffineExpr::constant_value(h(i));
    for (Eigen::Index j = 0; j < G.cols(); ++j) e.add(x + static_cast<int>(j), -G(i, j));
    b.add_nonneg(e);
  }
  return b.build();
}

void check_kkt(const ConeProblem& p, const ConeSolution& sol, double tol) {
  const RVec y = sol.dual.head(p.num_equalities());
  const RVec z = sol.dual.tail(p.h.size());
  const double pres_eq = p.b.size() ? (RMat(p.A) * sol.primal - p.b).norm() : 0.0;
  const double pres_cone = (RMat(p.G) * sol.primal + sol.slack - p.h).norm();
  const double dres = (RMat(p.A).transpose() * y + RMat(p.G).transpose() * z + p.c).norm();
  CHECK(pres_eq <= 10 * tol * std::max(1.0, p.b.size() ? p.b.norm() : 0.0));
  CHECK(pres_cone <= 10 * tol * std::max(1.0, p.h.norm()));
  CHECK(dres <= 10 * tol * std::max(1.0, p.c.norm()));
  CHECK(sol.residuals.primal <= tol);
  CHECK(sol.residuals.dual <= tol);
  CHECK(sol.residuals.gap <= tol);
}

}  // namespace

TEST_CASE("scalar equality with nonnegativity") {
  ConeBuilder b2;
  const int x2 = b2.add_variables(1);
  AffineExpr eq = AffineExpr::variable(x2);
  eq.constant = -1.0;
  b2.add_cost(x2, 1.0);
  b2.add_equality(eq);
  b2.add_nonneg(AffineExpr::variable(x2));
  const auto sol = solve(b2.build());
  REQUIRE(sol.optimal());
  CHECK(sol.primal(0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("distance from (3,4) to the unit disc") {
  ConeBuilder b;
  const int x = b.add_variables(2);
  b.add_soc({AffineExpr::constant_value(1.0), AffineExpr::variable(x), AffineExpr::variable(x + 1)});
  AffineExpr dx = AffineExpr::variable(x);
  dx.constant = -3.0;
  AffineExpr dy = AffineExpr::variable(x + 1);
  dy.constant = -4.0;
  const int t = lift_norm(b, {dx, dy});
  b.add_cost(t, 1.0);
  const auto p = b.build();
  const auto sol = solve(p);
  REQUIRE(sol.optimal());
  CHECK(sol.primal_objective == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(sol.primal(x) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(sol.primal(x + 1) == doctest::Approx(0.8).epsilon(1e-6));
  check_kkt(p, sol, kDefaultTol);
}

TEST_CASE("magnitude lift: w = 0 leaves z free above zero, 3-4-5 sits on the boundary") {
  {
    ConeBuilder b;
    const auto w = b.add_complex(1);
    const int z = b.add_variables(1);
    lift_complex_magnitude(b, w.re(0), w.im(0), z);
    b.add_equality(AffineExpr::variable(w.re(0)));
    b.add_equality(AffineExpr::variable(w.im(0)));
    b.add_cost(z, 1.0);
    const auto sol = solve(b.build());
    REQUIRE(sol.optimal());
    CHECK(std::abs(sol.primal(z)) < 1e-6);
  }
  {
    ConeBuilder c;
    const auto wc = c.add_complex(1);
    const int zc = c.add_variables(1);
    lift_complex_magnitude(c, wc.re(0), wc.im(0), zc);
    AffineExpr re = AffineExpr::variable(wc.re(0));
    re.constant = -3.0;
    AffineExpr im = AffineExpr::variable(wc.im(0));
    im.constant = -4.0;
    c.add_equality(re);
    c.add_equality(im);
    c.add_cost(zc, 1.0);
    const auto sol = solve(c.build());
    REQUIRE(sol.optimal());
    CHECK(sol.primal(zc) == doctest::Approx(5.0).epsilon(1e-7));
  }
}

TEST_CASE("magnitude lift: |1| <= 0.5 is reported infeasible") {
  ConeBuilder b;
  const auto w = b.add_complex(1);
  const int z = b.add_variables(1);
  lift_complex_magnitude(b, w.re(0), w.im(0), z);
  AffineExpr re = AffineExpr::variable(w.re(0));
  re.constant = -1.0;
  b.add_equality(re);
  b.add_equality(AffineExpr::variable(w.im(0)));
  AffineExpr zfix = AffineExpr::variable(z);
  zfix.constant = -0.5;
  b.add_equality(zfix);
  const auto p = b.build();
  const auto sol = solve(p);
  CHECK(sol.status == SolveStatus::infeasible);
  // Farkas: A'y + G'z = 0, b'y + h'z < 0, z in K.
  const RVec y = sol.dual.head(p.num_equalities());
  const RVec zz = sol.dual.tail(p.h.size());
  CHECK((RMat(p.A).transpose() * y + RMat(p.G).transpose() * zz).norm() < 1e-6);
  CHECK(p.b.dot(y) + p.h.dot(zz) < 0.0);
  CHECK(zz(0) >= zz.tail(2).norm() - 1e-9);
}

TEST_CASE("unbounded ray is reported") {
  ConeBuilder b;
  const int x = b.add_variables(1);
  b.add_nonneg(AffineExpr::variable(x));
  b.add_cost(x, -1.0);
  const auto p = b.build();
  const auto sol = solve(p);
  CHECK(sol.status == SolveStatus::unbounded);
  CHECK(sol.primal(0) > 0.0);
}

TEST_CASE("redundant equality rows are tolerated") {
  ConeBuilder b;
  const int x = b.add_variables(3);
  for (int i = 0; i < 3; ++i) b.add_nonneg(AffineExpr::variable(x + i));
  AffineExpr sum = AffineExpr::variable(x).add(x + 1, 1.0).add(x + 2, 1.0);
  sum.constant = -1.0;
  b.add_equality(sum);
  b.add_equality(sum);
  AffineExpr first = AffineExpr::variable(x);
  first.constant = -0.25;
  b.add_equality(first);
  b.add_cost(x + 1, 1.0);
  b.add_cost(x + 2, 2.0);
  const auto p = b.build();
  const auto sol = solve(p);
  REQUIRE(sol.optimal());
  CHECK(sol.primal_objective == doctest::Approx(0.75).epsilon(1e-6));
  check_kkt(p, sol, kDefaultTol);
}

TEST_CASE("inconsistent redundant rows are infeasible") {
  ConeBuilder b;
  const int x = b.add_variables(1);
  AffineExpr e1 = AffineExpr::variable(x);
  e1.constant = -1.0;
  AffineExpr e2 = AffineExpr::variable(x, 2.0);
  e2.constant = -3.0;
  b.add_equality(e1);
  b.add_equality(e2);
  CHECK(solve(b.build()).status == SolveStatus::infeasible);
}

TEST_CASE("50 random instances against closed-form and vertex oracles") {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.5, 2.0);
  int solved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int family = trial % 4;
    double oracle = 0.0;
    ConeProblem p;
    if (family == 0) {
      // Bounded random LP in 2 or 3 variables.
      const int n = 2 + trial % 2;
      const int m = 2 * n + 3;
      RMat G(m, n);
      RVec h(m);
      for (int i = 0; i < m; ++i) {
        RVec g(n);
        for (int j = 0; j < n; ++j) g(j) = nd(rng);
        G.row(i) = g.normalized().transpose();
        h(i) = ud(rng);
      }
      // Box keeps the LP bounded.
      RMat Gb(m + 2 * n, n);
      RVec hb(m + 2 * n);
      Gb.topRows(m) = G;
      hb.head(m) = h;
      Gb.bottomRows(2 * n) << RMat::Identity(n, n), -RMat::Identity(n, n);
      hb.tail(2 * n).setConstant(3.0);
      RVec c(n);
      for (int j = 0; j < n; ++j) c(j) = nd(rng);
      oracle = lp_vertex_oracle(Gb, hb, c);
      p = lp_problem(Gb, hb, c);
    } else if (family == 1) {
      // min ||F x - g|| unconstrained: least-squares residual norm.
      const int n = 3, r = 6;
      RMat F(r, n);
      RVec g(r);
      for (int i = 0; i < r; ++i) {
        g(i) = nd(rng);
        for (int j = 0; j < n; ++j) F(i, j) = nd(rng);
      }
      const RVec xs = F.colPivHouseholderQr().solve(g);
      oracle = (F * xs - g).norm();
      ConeBuilder b;
      const int x = b.add_variables(n);
      std::vector<AffineExpr> rows;
      for (int i = 0; i < r; ++i) {
        AffineExpr e = AffineExpr::constant_value(-g(i));
        for (int j = 0; j < n; ++j) e.add(x + j, F(i, j));
        rows.push_back(e);
      }
      b.add_cost(lift_norm(b, rows), 1.0);
      p = b.build();
    } else if (family == 2) {
      // min c'x s.t. ||x - x0|| <= r: c'x0 - r ||c||.
      const int n = 4;
      RVec c(n), x0(n);
      for (int j = 0; j < n; ++j) {
        c(j) = nd(rng);
        x0(j) = nd(rng);
      }
      const double radius = ud(rng);
      oracle = c.dot(x0) - radius * c.norm();
      ConeBuilder b;
      const int x = b.add_variables(n);
      std::vector<AffineExpr> cone{AffineExpr::constant_value(radius)};
      for (int j = 0; j < n; ++j) {
        AffineExpr e = AffineExpr::variable(x + j);
        e.constant = -x0(j);
        cone.push_back(e);
        b.add_cost(x + j, c(j));
      }
      b.add_soc(cone);
      p = b.build();
    } else {
      // min ||x - q||^2 s.t. a'x = beta, via the squared lift: (a'q - beta)^2 / ||a||^2.
      const int n = 5;
      RVec a(n), q(n);
      for (int j = 0; j < n; ++j) {
        a(j) = nd(rng);
        q(j) = nd(rng);
      }
      const double beta = nd(rng);
      oracle = std::pow(a.dot(q) - beta, 2) / a.squaredNorm();
      ConeBuilder b;
      const int x = b.add_variables(n);
      std::vector<AffineExpr> rows;
      AffineExpr eq = AffineExpr::constant_value(-beta);
      for (int j = 0; j < n; ++j) {
        AffineExpr e = AffineExpr::variable(x + j);
        e.constant = -q(j);
        rows.push_back(e);
        eq.add(x + j, a(j));
      }
      b.add_equality(eq);
      b.add_cost(lift_squared_norm(b, rows), 1.0);
      p = b.build();
    }
    const auto sol = solve(p);
    REQUIRE_MESSAGE(sol.optimal(), "trial " << trial << " status " << to_string(sol.status));
    CHECK_MESSAGE(std::abs(sol.primal_objective - oracle) <= 1e-5 * std::max(1.0, std::abs(oracle)),
                  "trial " << trial << " got " << sol.primal_objective << " want " << oracle);
    check_kkt(p, sol, kDefaultTol);
    CHECK(sol.primal_objective >= sol.dual_objective - 1e-7 * std::max(1.0, std::abs(oracle)));
    const auto again = solve(p);
    CHECK(again.iterations == sol.iterations);
    CHECK((again.primal.array() == sol.primal.array()).all());
    ++solved;
  }
  CHECK(solved == 50);
}

TEST_CASE("lift_quadratic: identity, rank one, and random PSD against eigendecomposition") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const int n = 4;
  CVec a(n);
  for (int i = 0; i < n; ++i) a(i) = {nd(rng), nd(rng)};

  // min w^H R w s.t. a^H w = 1 equals 1 / (a^H R^{-1} a).
  auto capon_power = [&](const CMat& R) {
    ConeBuilder b;
    const auto w = b.add_complex(n);
    const auto lq = lift_quadratic(b, R, w, true);
    auto [re, im] = complex_linear(a.adjoint(), w, 1.0);
    b.add_equality(re);
    b.add_equality(im);
    b.add_cost(lq.epigraph, 1.0);
    return solve(b.build(), 1e-10);
  };

  SUBCASE("R = I") {
    const auto sol = capon_power(CMat::Identity(n, n));
    REQUIRE(sol.optimal());
    CHECK(sol.primal_objective == doctest::Approx(1.0 / a.squaredNorm()).epsilon(1e-7));
  }
  SUBCASE("random PSD") {
    CMat X(n, n + 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n + 2; ++j) X(i, j) = {nd(rng), nd(rng)};
    const CMat R = X * X.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> eig(R);
    const CVec proj = eig.eigenvectors().adjoint() * a;
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += std::norm(proj(i)) / eig.eigenvalues()(i);
    const auto sol = capon_power(R);
    REQUIRE(sol.optimal());
    CHECK(std::abs(sol.primal_objective - 1.0 / quad) <= 1e-8 * std::max(1.0, 1.0 / quad) + 1e-8);
  }
  SUBCASE("rank one: epigraph equals |a^H w|") {
    ConeBuilder b;
    const auto w = b.add_complex(n);
    const auto lq = lift_quadratic(b, a * a.adjoint(), w, false);
    for (int i = 0; i < n; ++i) {
      AffineExpr re = AffineExpr::variable(w.re(i));
      re.constant = -0.5 * (i + 1);
      AffineExpr im = AffineExpr::variable(w.im(i));
      im.constant = 0.25 * i;
      b.add_equality(re);
      b.add_equality(im);
    }
    b.add_cost(lq.epigraph, 1.0);
    const auto sol = solve(b.build());
    REQUIRE(sol.optimal());
    CVec wv(n);
    for (int i = 0; i < n; ++i) wv(i) = {0.5 * (i + 1), -0.25 * i};
    CHECK(sol.primal_objective == doctest::Approx(std::abs(a.dot(wv))).epsilon(1e-7));
  }
}

TEST_CASE("problem dump round-trips") {
  ConeBuilder b;
  const int x = b.add_variables(2);
  b.add_soc({AffineExpr::constant_value(1.0), AffineExpr::variable(x), AffineExpr::variable(x + 1)});
  b.add_nonneg(AffineExpr::variable(x));
  b.add_cost(x, 1.0);
  b.add_cost(x + 1, -2.0);
  const auto p = b.build();
  std::stringstream ss;
  write_problem(ss, p);
  const auto q = read_problem(ss);
  CHECK((RMat(q.G) - RMat(p.G)).norm() == 0.0);
  CHECK((q.c - p.c).norm() == 0.0);
  CHECK((q.h - p.h).norm() == 0.0);
  CHECK(q.cones.soc_dims == p.cones.soc_dims);
  CHECK(solve(q).primal_objective == doctest::Approx(solve(p).primal_objective).epsilon(1e-12));
}

TEST_CASE("malformed problems are rejected") {
  ConeProblem p;
  p.c = RVec::Zero(2);
  p.h = RVec::Zero(3);
  p.G.resize(3, 2);
  p.cones.nonneg = 2;
  CHECK_THROWS_AS(p.validate(), DomainError);
}
