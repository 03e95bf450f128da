#include "rcas/dcsa.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include "rcas/beamform.hpp"
#include "rcas/signal_env.hpp"

namespace rcas {

namespace {

// Thin SVD of A_s^H: ||A_s^H w - g||^2 = ||S V^H w - U^H g||^2 + ||(I - U U^H) g||^2.
struct CompressedManifold {
  CMat factor;  // S V^H, N x N
  CMat U;       // K x N
};

CompressedManifold compress(const CMat& As) {
  Eigen::BDCSVD<CMat> svd(As.adjoint(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues().asDiagonal() * svd.matrixV().adjoint(), svd.matrixU()};
}

void check_shapes(const RMat& Z, const SplitSetup& setup) {
  const int n = setup.geom.num_antennas();
  if (setup.groups.num_antennas() != n) throw DomainError("group structure does not match the array");
  if (Z.rows() != n || Z.cols() != setup.num_arrays()) throw DomainError("selection matrix has wrong shape");
  if (setup.magnitude.size() != setup.grid.num_sidelobe()) throw DomainError("template length differs from K");
}

CMat initial_pattern(const SplitSetup& setup) {
  CMat F(setup.num_arrays(), setup.magnitude.size());
  for (int m = 0; m < F.rows(); ++m) F.row(m) = setup.magnitude.cast<cplx>();
  return F;
}

}  // namespace

std::vector<int> SplitDesign::selection(int m) const {
  std::vector<int> out;
  for (int i = 0; i < Z_binary.rows(); ++i) {
    if (Z_binary(i, m) > 0.5) out.push_back(i);
  }
  return out;
}

double SplitDesign::max_psl() const {
  return psl_per_array.empty() ? 0.0 : *std::max_element(psl_per_array.begin(), psl_per_array.end());
}

CMat RpTauProblem::decode_W(const RVec& x) const {
  CMat W(w.front().size, static_cast<Eigen::Index>(w.size()));
  for (std::size_t m = 0; m < w.size(); ++m) {
    for (int i = 0; i < w[m].size; ++i) W(i, static_cast<Eigen::Index>(m)) = {x(w[m].re(i)), x(w[m].im(i))};
  }
  return W;
}

RMat RpTauProblem::decode_Z(const RVec& x) const {
  const auto M = static_cast<Eigen::Index>(w.size());
  RMat Z(w.front().size, M);
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    for (Eigen::Index m = 0; m < M; ++m) Z(i, m) = std::clamp(x(z[static_cast<std::size_t>(i * M + m)]), 0.0, 1.0);
  }
  return Z;
}

RpTauProblem build_rp_tau(const RMat& Z_prev, const l0::Threshold& Pi, double rho, const CMat& F,
                          const SplitSetup& setup) {
  check_shapes(Z_prev, setup);
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (Pi.values.rows() != Z_prev.rows() || Pi.values.cols() != Z_prev.cols()) {
    throw DomainError("threshold matrix has wrong shape");
  }
  if ((Pi.values.array() >= 1.0).any()) throw DomainError("thresholds must be below 1");
  if (F.rows() != setup.num_arrays() || F.cols() != setup.magnitude.size()) throw DomainError("F has wrong shape");

  const int n = setup.geom.num_antennas();
  const int M = setup.num_arrays();
  const CMat As = manifold_matrix(setup.geom, setup.grid);
  const auto cm = compress(As);
  const CVec a = steering_vector(setup.geom);
  const RMat G = l0::penalty_gradient(Z_prev, Pi);

  RpTauProblem out;
  socp::ConeBuilder b;
  for (int m = 0; m < M; ++m) out.w.push_back(b.add_complex(n));
  const int zbase = b.add_variables(n * M);
  for (int k = 0; k < n * M; ++k) out.z.push_back(zbase + k);
  auto zvar = [&](int i, int m) { return out.z[static_cast<std::size_t>(i * M + m)]; };

  std::vector<socp::AffineExpr> rows;
  double tail = 0.0;
  for (int m = 0; m < M; ++m) {
    const CVec g = F.row(m).adjoint();
    const CVec proj = cm.U.adjoint() * g;
    tail += (g - cm.U * proj).squaredNorm();
    auto r = socp::complex_residual_rows(cm.factor, out.w[static_cast<std::size_t>(m)], proj);
    rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  rows.push_back(socp::AffineExpr::constant_value(std::sqrt(tail)));
  out.epigraph = socp::lift_norm(b, std::move(rows));
  b.add_cost(out.epigraph, 1.0);

  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < M; ++m) {
      if (G(i, m) != 0.0) b.add_cost(zvar(i, m), rho * G(i, m));
    }
  }

  for (int m = 0; m < M; ++m) {
    const auto& wm = out.w[static_cast<std::size_t>(m)];
    auto [re, im] = socp::complex_linear(a.adjoint(), wm, 1.0);
    b.add_equality(re);
    b.add_equality(im);
    for (int i = 0; i < n; ++i) {
      socp::lift_complex_magnitude(b, wm.re(i), wm.im(i), zvar(i, m));
      b.add_nonneg(socp::AffineExpr::variable(zvar(i, m)));
    }
  }
  for (int l = 0; l < setup.groups.num_groups(); ++l) {
    for (int m = 0; m < M; ++m) {
      socp::AffineExpr e = socp::AffineExpr::constant_value(-1.0);
      for (int i : setup.groups.members_of(l)) e.add(zvar(i, m), 1.0);
      b.add_equality(e);
    }
  }
  for (int i = 0; i < n; ++i) {
    socp::AffineExpr e = socp::AffineExpr::constant_value(-1.0);
    for (int m = 0; m < M; ++m) e.add(zvar(i, m), 1.0);
    b.add_equality(e);
  }
  out.problem = b.build();
  return out;
}

double rp_tau_objective(const CMat& W, const RMat& Z, const RMat& Z_prev, const l0::Threshold& Pi, double rho,
                        const CMat& F, const SplitSetup& setup) {
  const CMat As = manifold_matrix(setup.geom, setup.grid);
  const RMat G = l0::penalty_gradient(Z_prev, Pi);
  return (W.adjoint() * As - F).norm() + rho * (G.array() * Z.array()).sum();
}

DcsaRun run_dcsa_from(const SplitSetup& setup, const RMat& Z0, const DcsaOptions& options, bool keep_iterates) {
  check_shapes(Z0, setup);
  const CMat As = manifold_matrix(setup.geom, setup.grid);
  DcsaRun run;
  SplitDesign& d = run.design;
  RMat Z = Z0;
  CMat F = initial_pattern(setup);
  std::optional<CMat> W_prev;
  if (keep_iterates) run.iterates.push_back(Z);

  for (int k = 0; k < options.max_outer_iter; ++k) {
    const auto Pi = l0::update_threshold_matrix(Z, options.kappa, options.zeta);
    if (keep_iterates) run.thresholds.push_back(Pi.values);
    const auto rp = build_rp_tau(Z, Pi, options.rho, F, setup);
    const auto sol = socp::solve(rp.problem, options.solver_tol);
    run.last_status = sol.status;
    if (!sol.optimal()) break;
    const CMat W = rp.decode_W(sol.primal);
    const RMat Z_next = rp.decode_Z(sol.primal);
    const CMat response = W.adjoint() * As;
    d.deviation_trace.push_back((response - F).norm());
    d.z_step_trace.push_back((Z_next - Z).norm());
    Z = Z_next;
    if (keep_iterates) run.iterates.push_back(Z);
    d.W = W;
    d.iterations = k + 1;
    F = setup.magnitude.cast<cplx>().replicate(F.rows(), 1).cwiseProduct(
        response.unaryExpr([](cplx v) { return std::abs(v) > 0.0 ? v / std::abs(v) : cplx(1.0, 0.0); }));
    const bool settled = W_prev && (W - *W_prev).norm() < options.tol;
    W_prev = W;
    if (settled) {
      d.converged = true;
      break;
    }
  }
  d.Z = Z;
  d.Z_binary = binarize(Z, setup.groups);
  d.objective = d.W.size() ? (d.W.adjoint() * As - F).norm() : std::numeric_limits<double>::infinity();
  return run;
}

RMat restart_start(const SplitSetup& setup, std::uint64_t seed, int restart) {
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RMat Z0(setup.geom.num_antennas(), setup.num_arrays());
  for (int j = 0; j < Z0.cols(); ++j) {
    for (int i = 0; i < Z0.rows(); ++i) Z0(i, j) = u(rng);
  }
  return Z0;
}

SplitDesign run_dcsa(const SplitSetup& setup, const DcsaOptions& options) {
  if (options.restarts < 1) throw ConfigError("restarts", "at least one restart is required");
  std::vector<std::optional<SplitDesign>> results(static_cast<std::size_t>(options.restarts));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < options.restarts; r = next++) {
      auto run = run_dcsa_from(setup, restart_start(setup, options.seed, r), options);
      if (run.design.iterations == 0) continue;
      run.design.restart = r;
      results[static_cast<std::size_t>(r)] = std::move(run.design);
    }
  };
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, options.restarts);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const SplitDesign* best = nullptr;
  const SplitDesign* best_any = nullptr;
  for (const auto& r : results) {
    if (!r) continue;
    if (!best_any || r->objective < best_any->objective) best_any = &*r;
    if (is_near_binary(r->Z) && (!best || r->objective < best->objective)) best = &*r;
  }
  if (!best_any) throw NumericalError("every restart failed in the cone solver", 0.0);
  if (!best) throw DesignFailure("no restart reached a binary complementary selection", *best_any);
  SplitDesign out = *best;
  out.psl_per_array = split_psl(out.Z_binary, setup);
  return out;
}

RMat binarize(const RMat& Z, const GroupStructure& groups) {
  if (Z.rows() != groups.num_antennas() || Z.cols() != groups.group_size()) {
    throw DomainError("selection matrix has wrong shape");
  }
  const int M = groups.group_size();
  RMat out = RMat::Zero(Z.rows(), Z.cols());
  for (int l = 0; l < groups.num_groups(); ++l) {
    const int first = groups.first_member(l);
    const RMat slice = groups.extract(Z, l);
    std::vector<int> pick(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) slice.col(m).maxCoeff(&pick[static_cast<std::size_t>(m)]);
    std::vector<int> sorted = pick;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      // pick[m] = antenna of array m; exhaustive over permutations.
      std::vector<int> perm(static_cast<std::size_t>(M));
      std::iota(perm.begin(), perm.end(), 0);
      double best = -1.0;
      do {
        double mass = 0.0;
        for (int m = 0; m < M; ++m) mass += slice(perm[static_cast<std::size_t>(m)], m);
        if (mass > best) {
          best = mass;
          pick = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    for (int m = 0; m < M; ++m) out(first + pick[static_cast<std::size_t>(m)], m) = 1.0;
  }
  return out;
}

bool is_near_binary(const RMat& Z, double tol) {
  return (Z.array().abs().min((Z.array() - 1.0).abs()) <= tol).all();
}

bool is_complementary_selection(const RMat& Z, const GroupStructure& groups) {
  if (Z.rows() != groups.num_antennas() || Z.cols() != groups.group_size()) return false;
  if (!((Z.array() == 0.0) || (Z.array() == 1.0)).all()) return false;
  if (!(Z.rowwise().sum().array() == 1.0).all()) return false;
  for (int l = 0; l < groups.num_groups(); ++l) {
    if (!(groups.extract(Z, l).colwise().sum().array() == 1.0).all()) return false;
  }
  return true;
}

std::vector<double> split_psl(const RMat& Z_binary, const SplitSetup& setup) {
  std::vector<double> out;
  for (int m = 0; m < Z_binary.cols(); ++m) {
    std::vector<int> sel;
    for (int i = 0; i < Z_binary.rows(); ++i) {
      if (Z_binary(i, m) > 0.5) sel.push_back(i);
    }
    const auto g = setup.geom.subarray(sel);
    out.push_back(peak_sidelobe_level(minimax_weights(g, setup.grid), g, setup.grid));
  }
  return out;
}

}  // namespace rcas
