#include "rcas/beamform.hpp"

#include <limits>

#include <Eigen/Eigenvalues>

#include "rcas/socp.hpp"

namespace rcas {

DesiredPattern DesiredPattern::uniform(int K, double level_db) {
  if (K < 1) throw DomainError("pattern needs at least one angle");
  return {RRow::Constant(K, db_to_linear_magnitude(level_db)), CRow::Ones(K)};
}

RVec Beampattern::normalized_db() const {
  const double g = std::abs(steer_gain);
  RVec out(response.size());
  for (Eigen::Index k = 0; k < response.size(); ++k) out(k) = 20.0 * std::log10(std::abs(response(k)) / g);
  return out;
}

double apply_loading_policy(CMat& Q) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (Q + Q.adjoint()), Eigen::EigenvaluesOnly);
  const RVec& ev = eig.eigenvalues();
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (cond <= kLoadingConditionLimit) return 0.0;
  const double eps = kLoadingFactor * std::real(Q.trace()) / static_cast<double>(Q.rows());
  Q.diagonal().array() += eps;
  return eps;
}

Weights constrained_quadratic(CMat Q, const CVec& q, const CVec& a) {
  if (Q.rows() != Q.cols() || Q.rows() != a.size() || q.size() != a.size()) {
    throw DomainError("constrained_quadratic: dimension mismatch");
  }
  Weights out;
  out.loading = apply_loading_policy(Q);
  Eigen::LDLT<CMat> ldlt(Q);
  CVec u, v;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    u = ldlt.solve(q);
    v = ldlt.solve(a);
  } else {
    Eigen::PartialPivLU<CMat> lu(Q);
    u = lu.solve(q);
    v = lu.solve(a);
  }
  const cplx av = a.dot(v);
  if (std::abs(av) == 0.0 || !std::isfinite(std::abs(av))) {
    throw NumericalError("constrained solve is singular", std::numeric_limits<double>::infinity());
  }
  const cplx lambda = (1.0 - a.dot(u)) / av;
  CVec w = u + lambda * v;
  w /= a.dot(w);
  out.w = std::move(w);
  return out;
}

CVec bordered_weights(const CMat& Rb, const CVec& a) {
  const auto n = a.size();
  if (Rb.rows() != n + 1 || Rb.cols() != n + 1) throw DomainError("bordered matrix must be (n+1) x (n+1)");
  CMat C = CMat::Zero(n + 1, 2);
  C(0, 0) = -1.0;
  C.col(0).tail(n) = a;
  C(0, 1) = 1.0;
  Eigen::PartialPivLU<CMat> lu(Rb);
  const CMat X = lu.solve(C);
  const Eigen::Matrix2cd Mx = C.adjoint() * X;
  const Eigen::Vector2cd g(0.0, 1.0);
  const CVec wt = X * Mx.inverse() * g;
  return wt.tail(n);
}

Weights quiescent_weights(const ArrayGeometry& geom, const AngleGrid& grid, const DesiredPattern& pattern) {
  const CMat As = manifold_matrix(geom, grid);
  if (pattern.size() != As.cols()) throw DomainError("pattern length does not match the sidelobe grid");
  const CRow f = pattern.complex();
  return constrained_quadratic(As * As.adjoint(), As * f.adjoint(), steering_vector(geom));
}

CRow phase_update(const CRow& response) {
  CRow out(response.size());
  for (Eigen::Index k = 0; k < response.size(); ++k) {
    const double mag = std::abs(response(k));
    out(k) = mag > 0.0 ? response(k) / mag : cplx(1.0, 0.0);
  }
  return out;
}

Weights capon_weights(const CMat& R, const ArrayGeometry& geom) {
  if (R.rows() != geom.num_antennas()) throw DomainError("covariance size does not match the array");
  return constrained_quadratic(R, CVec::Zero(R.rows()), steering_vector(geom));
}

Weights combined_weights(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                         const DesiredPattern& pattern, double beta) {
  if (!(beta >= 0.0)) throw DomainError("beta must be nonnegative");
  if (R.rows() != geom.num_antennas()) throw DomainError("covariance size does not match the array");
  const CMat As = manifold_matrix(geom, grid);
  if (pattern.size() != As.cols()) throw DomainError("pattern length does not match the sidelobe grid");
  const CRow f = pattern.complex();
  return constrained_quadratic(R + beta * As * As.adjoint(), beta * As * f.adjoint(), steering_vector(geom));
}

double combined_objective(const CVec& w, const CMat& R, const CMat& As, const CRow& f, double beta) {
  const CRow r = w.adjoint() * As;
  return std::real(w.dot(R * w)) + beta * (r - f).squaredNorm();
}

Beampattern evaluate_pattern(const CVec& w, const ArrayGeometry& geom, const AngleGrid& grid) {
  if (w.size() != geom.num_antennas()) throw DomainError("weight length does not match the array");
  const CMat A = full_manifold_matrix(geom, grid);
  Beampattern bp{grid, (w.adjoint() * A).transpose(), w.dot(steering_vector(geom))};
  return bp;
}

double peak_sidelobe_level(const Beampattern& bp) {
  if (bp.grid.num_sidelobe() == 0) throw DomainError("sidelobe region is empty");
  const double g = std::abs(bp.steer_gain);
  double peak = 0.0;
  for (int k = 0; k < bp.grid.size(); ++k) {
    if (bp.grid.sidelobe_mask[static_cast<std::size_t>(k)]) peak = std::max(peak, std::abs(bp.response(k)));
  }
  return 20.0 * std::log10(peak / g);
}

double peak_sidelobe_level(const CVec& w, const ArrayGeometry& geom, const AngleGrid& grid) {
  return peak_sidelobe_level(evaluate_pattern(w, geom, grid));
}

double pattern_deviation(const CVec& w, const CMat& As, const RRow& magnitude) {
  const CRow r = w.adjoint() * As;
  return (r.cwiseAbs() - magnitude).norm();
}

PatternFit fit_quiescent(const ArrayGeometry& geom, const AngleGrid& grid, const RRow& magnitude, int max_iter,
                         double tol) {
  const CMat As = manifold_matrix(geom, grid);
  if (magnitude.size() != As.cols()) throw DomainError("pattern length does not match the sidelobe grid");
  const CVec a0 = steering_vector(geom);
  const CMat Q = As * As.adjoint();
  PatternFit fit;
  fit.pattern = {magnitude, CRow::Ones(magnitude.size())};
  for (int k = 0; k < max_iter; ++k) {
    const Weights wt = constrained_quadratic(Q, As * fit.pattern.complex().adjoint(), a0);
    fit.w = wt.w;
    fit.loading = wt.loading;
    fit.pattern.phase = phase_update(fit.w.adjoint() * As);
    fit.trace.push_back(pattern_deviation(fit.w, As, magnitude));
    fit.iterations = k + 1;
    if (k > 0 && fit.trace[k - 1] - fit.trace[k] < tol) break;
  }
  return fit;
}

PatternFit fit_combined(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid, const RRow& magnitude,
                        double beta, int max_iter, double tol) {
  if (!(beta >= 0.0)) throw DomainError("beta must be nonnegative");
  const CMat As = manifold_matrix(geom, grid);
  if (magnitude.size() != As.cols()) throw DomainError("pattern length does not match the sidelobe grid");
  if (R.rows() != geom.num_antennas()) throw DomainError("covariance size does not match the array");
  const CVec a0 = steering_vector(geom);
  const CMat Q = R + beta * As * As.adjoint();
  PatternFit fit;
  fit.pattern = {magnitude, CRow::Ones(magnitude.size())};
  for (int k = 0; k < max_iter; ++k) {
    const Weights wt = constrained_quadratic(Q, beta * As * fit.pattern.complex().adjoint(), a0);
    fit.w = wt.w;
    fit.loading = wt.loading;
    fit.pattern.phase = phase_update(fit.w.adjoint() * As);
    fit.trace.push_back(combined_objective(fit.w, R, As, fit.pattern.complex(), beta));
    fit.iterations = k + 1;
    if (k > 0 && fit.trace[k - 1] - fit.trace[k] < tol) break;
  }
  return fit;
}

CVec minimax_weights(const ArrayGeometry& geom, const AngleGrid& grid) {
  const CMat As = manifold_matrix(geom, grid);
  const int n = geom.num_antennas();
  socp::ConeBuilder b;
  const auto w = b.add_complex(n);
  const int t = b.add_variables(1);
  for (Eigen::Index k = 0; k < As.cols(); ++k) {
    auto [re, im] = socp::complex_linear(As.col(k).adjoint(), w, 0.0);
    b.add_soc({socp::AffineExpr::variable(t), std::move(re), std::move(im)});
  }
  auto [re, im] = socp::complex_linear(steering_vector(geom).adjoint(), w, 1.0);
  b.add_equality(re);
  b.add_equality(im);
  b.add_cost(t, 1.0);
  const auto sol = socp::solve(b.build());
  if (!sol.optimal()) throw NumericalError(std::string("minimax fit failed: ") + socp::to_string(sol.status), 0.0);
  CVec out(n);
  for (int i = 0; i < n; ++i) out(i) = {sol.primal(w.re(i)), sol.primal(w.im(i))};
  return out;
}

}  // namespace rcas
