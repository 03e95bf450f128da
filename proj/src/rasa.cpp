#include "rcas/rasa.hpp"

#include <cmath>
#include <limits>

namespace rcas {

std::vector<int> AdaptiveDesign::selection() const {
  std::vector<int> out;
  for (int i = 0; i < z.size(); ++i) {
    if (z(i) > 0.5) out.push_back(i);
  }
  return out;
}

double default_beta(const CMat& R, const CMat& As) {
  const double ts = std::real((As * As.adjoint()).trace());
  if (!(ts > 0.0)) throw DomainError("empty sidelobe manifold");
  return std::real(R.trace()) / (static_cast<double>(R.rows()) * ts);
}

CovarianceEstimate estimate_full_covariance(std::span<const std::vector<int>> arrays, const Scenario& sc,
                                            const ArrayGeometry& geom, int T, std::uint64_t seed) {
  auto est = switched_collection(arrays, sc, geom, T, seed).covariance;
  est.loading = apply_loading_policy(est.matrix);
  est.kind = CovarianceKind::sample;
  return est;
}

CVec SelectionProblem::decode_w(const RVec& x) const {
  CVec out(w.size);
  for (int i = 0; i < w.size; ++i) out(i) = {x(w.re(i)), x(w.im(i))};
  return out;
}

RVec SelectionProblem::decode_z(const RVec& x) const { return x.segment(zbase, w.size).cwiseMax(0.0); }

SelectionProblem build_selection_problem(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                                         const DesiredPattern& pattern, double beta, double rho, const RVec& penalty,
                                         const GroupStructure* groups) {
  const int n = geom.num_antennas();
  if (R.rows() != n || R.cols() != n) throw DomainError("covariance size does not match the array");
  if (penalty.size() != n) throw DomainError("penalty length does not match the array");
  if (!(beta >= 0.0) || !(rho >= 0.0)) throw DomainError("beta and rho must be nonnegative");
  if (groups && groups->num_antennas() != n) throw DomainError("group structure does not match the array");
  const CMat As = manifold_matrix(geom, grid);
  if (pattern.size() != As.cols()) throw DomainError("pattern length does not match the sidelobe grid");

  // w^H Q w - 2 Re(w^H q) + beta ||f||^2 = ||L^H w - v||^2 + offset with Q = L L^H, v = L^{-1} q.
  CMat Q = R + beta * As * As.adjoint();
  apply_loading_policy(Q);
  const CRow f = pattern.complex();
  const CVec q = beta * As * f.adjoint();
  Eigen::LLT<CMat> llt(Q);
  if (llt.info() != Eigen::Success) throw NumericalError("combined quadratic is not positive definite", 0.0);
  const CVec v = llt.matrixL().solve(q);

  SelectionProblem out;
  socp::ConeBuilder b;
  out.w = b.add_complex(n);
  out.zbase = b.add_variables(n);
  out.offset = beta * f.squaredNorm() - v.squaredNorm();
  const CMat LH = llt.matrixL().adjoint();
  const int u = socp::lift_squared_norm(b, socp::complex_residual_rows(LH, out.w, v));
  b.add_cost(u, 1.0);
  for (int i = 0; i < n; ++i) {
    if (penalty(i) != 0.0) b.add_cost(out.zbase + i, rho * penalty(i));
    socp::lift_complex_magnitude(b, out.w.re(i), out.w.im(i), out.zbase + i);
    b.add_nonneg(socp::AffineExpr::variable(out.zbase + i));
  }
  auto [re, im] = socp::complex_linear(steering_vector(geom).adjoint(), out.w, 1.0);
  b.add_equality(re);
  b.add_equality(im);
  if (groups) {
    for (int l = 0; l < groups->num_groups(); ++l) {
      socp::AffineExpr e = socp::AffineExpr::constant_value(-1.0);
      for (int i : groups->members_of(l)) e.add(out.zbase + i, 1.0);
      b.add_equality(e);
    }
  }
  out.problem = b.build();
  return out;
}

namespace {

double resolve_beta(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid, const RasaOptions& o) {
  return o.beta >= 0.0 ? o.beta : default_beta(R, manifold_matrix(geom, grid));
}

RVec solve_z(const SelectionProblem& p, double tol) {
  const auto sol = socp::solve(p.problem, tol);
  if (!sol.optimal()) throw NumericalError(std::string("selection subproblem: ") + socp::to_string(sol.status), 0.0);
  return p.decode_z(sol.primal);
}

}  // namespace

RVec reweighted_l1_init(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                        const DesiredPattern& pattern, const RasaOptions& options, std::vector<double>* trace) {
  if (!(options.gamma > 0.0)) throw DomainError("gamma must be positive");
  const double beta = resolve_beta(R, geom, grid, options);
  RVec z = RVec::Ones(geom.num_antennas());
  for (int k = 0; k < options.max_iter; ++k) {
    const RVec c = (z.array() + options.gamma).inverse();
    const auto p = build_selection_problem(R, geom, grid, pattern, beta, options.rho, c, nullptr);
    const RVec next = solve_z(p, options.solver_tol);
    const double step = (next - z).norm();
    if (trace) trace->push_back(step);
    z = next;
    if (step < options.tol) break;
  }
  return z;
}

AdaptiveDesign rasa_stage_two(const CMat& R, const ArrayGeometry& geom, const GroupStructure& groups,
                              const AngleGrid& grid, const DesiredPattern& pattern, const RVec& z0,
                              const RasaOptions& options, std::vector<RVec>* iterates) {
  if (z0.size() != geom.num_antennas()) throw DomainError("start vector length does not match the array");
  const double beta = resolve_beta(R, geom, grid, options);
  AdaptiveDesign d;
  d.converged = false;
  RVec z = z0.cwiseMax(0.0);
  if (iterates) iterates->push_back(z);
  for (int k = 0; k < options.max_iter; ++k) {
    const auto tau = l0::update_threshold_vector(z, options.kappa, options.zeta);
    const RVec g = l0::phi_subgradient(z, tau.column(0));
    const auto p = build_selection_problem(R, geom, grid, pattern, beta, options.rho, g, &groups);
    const RVec next = solve_z(p, options.solver_tol);
    const double step = (next - z).norm();
    d.trace.push_back(step);
    z = next;
    if (iterates) iterates->push_back(z);
    if (step < options.tol) {
      d.converged = true;
      break;
    }
  }
  d.z_relaxed = z;
  d.z = RVec::Zero(z.size());
  for (int l = 0; l < groups.num_groups(); ++l) {
    Eigen::Index arg = 0;
    groups.extract(z, l).maxCoeff(&arg);
    d.z(groups.first_member(l) + static_cast<int>(arg)) = 1.0;
  }
  d.w = combined_on_support(R, geom, grid, pattern, beta, d.selection());
  d.sinr_db = std::numeric_limits<double>::quiet_NaN();
  return d;
}

AdaptiveDesign run_rasa(const CMat& R, const ArrayGeometry& geom, const GroupStructure& groups,
                        const AngleGrid& grid, const DesiredPattern& pattern, const RasaOptions& options) {
  std::vector<double> init_trace;
  const RVec init = reweighted_l1_init(R, geom, grid, pattern, options, &init_trace);
  AdaptiveDesign d = rasa_stage_two(R, geom, groups, grid, pattern, init, options);
  d.init_z = init;
  d.init_trace = std::move(init_trace);
  return d;
}

CVec combined_on_support(const CMat& R, const ArrayGeometry& geom, const AngleGrid& grid,
                         const DesiredPattern& pattern, double beta, std::span<const int> sel) {
  const auto g = geom.subarray(sel);
  const CVec w = combined_weights(principal_submatrix(R, sel), g, grid, pattern, beta).w;
  return scatter(w, sel, geom.num_antennas());
}

CVec capon_on_support(const CMat& R, const ArrayGeometry& geom, std::span<const int> sel) {
  const auto g = geom.subarray(sel);
  return scatter(capon_weights(principal_submatrix(R, sel), g).w, sel, geom.num_antennas());
}

}  // namespace rcas
