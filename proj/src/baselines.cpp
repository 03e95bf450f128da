#include "rcas/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <thread>

#include "rcas/rasa.hpp"

namespace rcas {

namespace {

template <typename Fn>
void parallel_for(std::uint64_t count, int threads, Fn&& fn) {
  int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  t = static_cast<int>(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(t, 1)), 1, std::max<std::uint64_t>(count, 1)));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

double fitted_psl(const ArrayGeometry& g, const AngleGrid& grid, const RRow& magnitude, PslFit fit) {
  const CVec w = fit == PslFit::minimax ? minimax_weights(g, grid) : fit_quiescent(g, grid, magnitude).w;
  return peak_sidelobe_level(w, g, grid);
}

}  // namespace

SplitRanking enumerate_splittings(const ArrayGeometry& geom, const GroupStructure& groups, const AngleGrid& grid,
                                  const RRow& magnitude, PslFit fit, int threads) {
  if (groups.group_size() != 2) throw DomainError("pairwise splitting needs two antennas per group");
  if (groups.num_antennas() != geom.num_antennas()) throw DomainError("group structure does not match the array");
  const int L = groups.num_groups();
  if (L > kMaxSplitGroups) {
    throw DomainError("refusing to enumerate 2^" + std::to_string(L - 1) + " splittings (limit 2^" +
                      std::to_string(kMaxSplitGroups - 1) + ")");
  }
  const std::uint64_t count = std::uint64_t{1} << (L - 1);
  SplitRanking out;
  out.entries.resize(count);
  parallel_for(count, threads, [&](std::uint64_t bits) {
    SplitEntry e;
    e.bits = bits;
    for (int l = 0; l < L; ++l) {
      const int take = static_cast<int>((bits >> l) & 1U);
      e.first.push_back(groups.first_member(l) + take);
      e.second.push_back(groups.first_member(l) + 1 - take);
    }
    e.psl_first = fitted_psl(geom.subarray(e.first), grid, magnitude, fit);
    e.psl_second = fitted_psl(geom.subarray(e.second), grid, magnitude, fit);
    out.entries[bits] = std::move(e);
  });
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const SplitEntry& a, const SplitEntry& b) { return a.max_psl() < b.max_psl(); });
  return out;
}

std::vector<int> selection_from_code(std::uint64_t code, const GroupStructure& groups) {
  const auto M = static_cast<std::uint64_t>(groups.group_size());
  std::vector<int> sel;
  for (int l = 0; l < groups.num_groups(); ++l) {
    sel.push_back(groups.first_member(l) + static_cast<int>(code % M));
    code /= M;
  }
  return sel;
}

const char* to_string(BeamformerKind kind) { return kind == BeamformerKind::capon ? "capon" : "combined"; }

AdaptiveRanking enumerate_adaptive(const ArrayGeometry& geom, const GroupStructure& groups, const Scenario& sc,
                                   const AdaptiveOracleSetup& setup, int threads) {
  if (groups.num_antennas() != geom.num_antennas()) throw DomainError("group structure does not match the array");
  if (setup.kind == BeamformerKind::combined && (!setup.grid || !setup.pattern)) {
    throw DomainError("combined oracle needs a grid and a pattern");
  }
  std::uint64_t count = 1;
  for (int l = 0; l < groups.num_groups(); ++l) {
    count *= static_cast<std::uint64_t>(groups.group_size());
    if (count > kMaxAdaptiveSelections) {
      throw DomainError("refusing to enumerate " + std::to_string(groups.group_size()) + "^" +
                        std::to_string(groups.num_groups()) + " selections (limit 2^20)");
    }
  }
  const CMat R = theoretical_covariance(sc, geom).matrix;
  AdaptiveRanking out;
  out.entries.resize(count);
  parallel_for(count, threads, [&](std::uint64_t code) {
    const auto sel = selection_from_code(code, groups);
    const CVec w = setup.kind == BeamformerKind::capon
                       ? capon_on_support(R, geom, sel)
                       : combined_on_support(R, geom, *setup.grid, *setup.pattern, setup.beta, sel);
    out.entries[code] = {code, output_sinr(w, sc, geom)};
  });
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const AdaptiveEntry& a, const AdaptiveEntry& b) { return a.sinr_db > b.sinr_db; });
  out.best_sinr_db = out.entries.front().sinr_db;
  out.best_selection = selection_from_code(out.entries.front().code, groups);
  return out;
}

std::vector<int> nested_positions(int inner, int outer) {
  if (inner < 1 || outer < 1) throw DomainError("nested levels need at least one antenna each");
  std::vector<int> p;
  for (int i = 0; i < inner; ++i) p.push_back(i);
  for (int k = 1; k <= outer; ++k) {
    const int pos = (inner + 1) * k - 1;
    if (pos != p.back()) p.push_back(pos);
  }
  return p;
}

std::vector<int> nested_array(int budget, int aperture) {
  if (budget < 2 || aperture < 2) throw DomainError("nested array needs a budget and aperture of at least 2");
  int best_inner = -1;
  int best_outer = -1;
  for (int inner = 1; inner < aperture; ++inner) {
    if (aperture % (inner + 1) != 0) continue;
    const int outer = aperture / (inner + 1);
    const int used = inner + outer;
    if (used > budget) continue;
    if (used > best_inner + best_outer ||
        (used == best_inner + best_outer && std::abs(inner - outer) < std::abs(best_inner - best_outer))) {
      best_inner = inner;
      best_outer = outer;
    }
  }
  if (best_inner < 0) {
    throw DomainError("no two-level nested array with at most " + std::to_string(budget) +
                      " antennas spans an aperture of " + std::to_string(aperture));
  }
  return nested_positions(best_inner, best_outer);
}

std::vector<bool> coarray_lags(std::span<const int> positions) {
  int span = 0;
  for (int a : positions) {
    for (int b : positions) span = std::max(span, a - b);
  }
  std::vector<bool> present(static_cast<std::size_t>(span + 1), false);
  for (int a : positions) {
    for (int b : positions) {
      if (a >= b) present[static_cast<std::size_t>(a - b)] = true;
    }
  }
  return present;
}

CovarianceEstimate coarray_augment(const CMat& R_sparse, std::span<const int> positions, int N) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  if (R_sparse.rows() != n || R_sparse.cols() != n) throw DomainError("covariance size does not match positions");
  if (N < 1) throw DomainError("augmented size must be positive");
  CVec sum = CVec::Zero(N);
  std::vector<int> count(static_cast<std::size_t>(N), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const int lag = positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)];
      if (lag < 0 || lag >= N) continue;
      sum(lag) += R_sparse(i, j);
      ++count[static_cast<std::size_t>(lag)];
    }
  }
  std::string holes;
  for (int l = 0; l < N; ++l) {
    if (count[static_cast<std::size_t>(l)] == 0) holes += (holes.empty() ? "" : ", ") + std::to_string(l);
  }
  if (!holes.empty()) throw DomainError("coarray has holes at lags " + holes);

  CMat T(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const int lag = std::abs(i - j);
      const cplx r = sum(lag) / static_cast<double>(count[static_cast<std::size_t>(lag)]);
      T(i, j) = i >= j ? r : std::conj(r);
    }
  }
  for (int i = 0; i < N; ++i) T(i, i) = T(i, i).real();

  Eigen::SelfAdjointEigenSolver<CMat> es(T);
  const RVec ev = es.eigenvalues();
  CovarianceEstimate out;
  out.kind = CovarianceKind::augmented;
  out.psd_clip = std::max(0.0, -ev.minCoeff());
  if (out.psd_clip > 0.0) {
    const CMat V = es.eigenvectors();
    T = V * ev.cwiseMax(0.0).cast<cplx>().asDiagonal() * V.adjoint();
    T = 0.5 * (T + T.adjoint());
  }
  out.matrix = std::move(T);
  return out;
}

}  // namespace rcas
