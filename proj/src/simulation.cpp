#include "rcas/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <thread>

#include "rcas/baselines.hpp"

namespace rcas {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::fixed: return "fixed";
    case Strategy::rcas: return "rcas";
    case Strategy::coarray: return "coarray";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "fixed") return Strategy::fixed;
  if (name == "rcas") return Strategy::rcas;
  if (name == "coarray") return Strategy::coarray;
  throw ConfigError("strategy", "unknown strategy '" + name + "' (expected fixed, rcas or coarray)");
}

void SimulationResult::write_csv(std::ostream& out, int block) const {
  if (block < 1) throw DomainError("block length must be positive");
  out << "sample_index,sinr_db,active_array_id,phase\n";
  for (std::size_t t = 0; t < sinr_db.size(); t += static_cast<std::size_t>(block)) {
    out << t << ',' << sinr_db[t] << ',' << array_id[t] << ','
        << (phase[t] == Phase::sensing ? "sensing" : "filtering") << '\n';
  }
}

AdaptiveDesign design_for_scenario(const Scenario& sc, const SimulationContext& ctx) {
  const CMat R = theoretical_covariance(sc, ctx.geom).matrix;
  return run_rasa(R, ctx.geom, ctx.groups, ctx.grid, ctx.pattern, ctx.rasa);
}

CovarianceEstimate nested_covariance(const Scenario& sc, const SimulationContext& ctx, int samples,
                                     std::uint64_t seed) {
  const auto g = ctx.geom.subarray(ctx.nested);
  const auto block = synthesize_snapshots(sc, g, samples, seed);
  return coarray_augment(sample_covariance(block.data), g.positions(), ctx.geom.num_antennas());
}

namespace {

class Timeline {
 public:
  explicit Timeline(const std::vector<Segment>& segs) : segs_(segs) {
    if (segs_.empty()) throw DomainError("timeline is empty");
    int start = 0;
    for (const auto& s : segs_) {
      if (s.duration < 1) throw DomainError("segment duration must be positive");
      s.scenario.validate();
      starts_.push_back(start);
      start += s.duration;
    }
    total_ = start;
  }
  int total() const { return total_; }
  int segment_at(int t) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    return static_cast<int>(it - starts_.begin()) - 1;
  }
  const Scenario& scenario(int seg) const { return segs_[static_cast<std::size_t>(seg)].scenario; }

  // Snapshots of `geom` over [t0, t0 + len), each drawn from the scenario in force.
  CMat snapshots(const ArrayGeometry& geom, int t0, int len, std::uint64_t seed) const {
    CMat out(geom.num_antennas(), len);
    int t = t0;
    std::uint64_t chunk = 0;
    while (t < t0 + len) {
      const int seg = segment_at(t);
      const int end = std::min(t0 + len, seg + 1 < static_cast<int>(starts_.size())
                                             ? starts_[static_cast<std::size_t>(seg + 1)]
                                             : total_);
      out.middleCols(t - t0, end - t) =
          synthesize_snapshots(scenario(seg), geom, end - t, derive_seed(seed, chunk++)).data;
      t = end;
    }
    return out;
  }

 private:
  const std::vector<Segment>& segs_;
  std::vector<int> starts_;
  int total_ = 0;
};

}  // namespace

SimulationResult dynamic_simulation(const std::vector<Segment>& timeline, Strategy strategy,
                                    const SimulationContext& ctx) {
  const Timeline tl(timeline);
  const int N = ctx.geom.num_antennas();
  const int M = static_cast<int>(ctx.arrays.size());
  if (strategy == Strategy::rcas) check_complementary(ctx.arrays, N);
  if (ctx.T < 1) throw ConfigError("T", "snapshot count must be positive");
  const int window = 2 * ctx.T;
  const int sense_len = M * ctx.T;

  SimulationResult res;
  res.strategy = strategy;
  res.sinr_db.resize(static_cast<std::size_t>(tl.total()));
  res.array_id.resize(res.sinr_db.size());
  res.phase.resize(res.sinr_db.size());

  // Quiescent weights carried by the sensing arrays.
  std::vector<CVec> sensing_w;
  if (strategy == Strategy::rcas) {
    for (const auto& arr : ctx.arrays) {
      sensing_w.push_back(scatter(fit_quiescent(ctx.geom.subarray(arr), ctx.grid, ctx.pattern.magnitude).w, arr, N));
    }
  } else if (strategy == Strategy::coarray) {
    sensing_w.push_back(
        scatter(fit_quiescent(ctx.geom.subarray(ctx.nested), ctx.grid, ctx.pattern.magnitude).w, ctx.nested, N));
  }

  CVec w;
  int config = -1;
  bool sensing = strategy != Strategy::fixed;
  int sense_start = 0;
  int sensing_round = 0;
  if (strategy == Strategy::fixed) {
    const AdaptiveDesign d = ctx.fixed_design ? *ctx.fixed_design : design_for_scenario(tl.scenario(0), ctx);
    w = d.w;
    config = 0;
    res.reconfigurations.push_back({0, d.selection()});
  }

  double baseline = 0.0;
  std::deque<double> recent;
  double recent_sum = 0.0;
  int cached_seg = -1;
  const CVec* cached_w = nullptr;
  double cached = 0.0;
  auto sinr_of = [&](const CVec& weights, int seg) {
    if (seg != cached_seg || &weights != cached_w) {
      cached = output_sinr(weights, tl.scenario(seg), ctx.geom);
      cached_seg = seg;
      cached_w = &weights;
    }
    return cached;
  };

  for (int t = 0; t < tl.total(); ++t) {
    const int seg = tl.segment_at(t);
    const auto i = static_cast<std::size_t>(t);
    if (sensing) {
      const int offset = t - sense_start;
      const int which = strategy == Strategy::rcas ? offset / ctx.T : 0;
      res.sinr_db[i] = sinr_of(sensing_w[static_cast<std::size_t>(which)], seg);
      res.array_id[i] = strategy == Strategy::rcas ? which : M;
      res.phase[i] = Phase::sensing;
      if (offset + 1 == sense_len) {
        const std::uint64_t seed = derive_seed(ctx.seed, static_cast<std::uint64_t>(sensing_round++));
        CMat R;
        if (strategy == Strategy::rcas) {
          SnapshotBlock block{tl.snapshots(ctx.geom, sense_start, sense_len, seed), Mask::Constant(N, sense_len, false)};
          for (int m = 0; m < M; ++m) {
            for (int a : ctx.arrays[static_cast<std::size_t>(m)]) {
              block.active.row(a).segment(m * ctx.T, ctx.T).setConstant(true);
            }
          }
          for (Eigen::Index a = 0; a < block.data.rows(); ++a) {
            for (Eigen::Index c = 0; c < block.data.cols(); ++c) {
              if (!block.active(a, c)) block.data(a, c) = 0.0;
            }
          }
          R = masked_covariance(block);
          apply_loading_policy(R);
        } else {
          const auto g = ctx.geom.subarray(ctx.nested);
          const CMat Y = tl.snapshots(g, sense_start, sense_len, seed);
          R = coarray_augment(sample_covariance(Y), g.positions(), N).matrix;
        }
        const auto d = run_rasa(R, ctx.geom, ctx.groups, ctx.grid, ctx.pattern, ctx.rasa);
        w = d.w;
        cached_w = nullptr;
        ++config;
        res.reconfigurations.push_back({t + 1, d.selection()});
        sensing = false;
        recent.clear();
        recent_sum = 0.0;
        baseline = std::numeric_limits<double>::quiet_NaN();
      }
      continue;
    }
    const double s = sinr_of(w, seg);
    res.sinr_db[i] = s;
    res.array_id[i] = M + 1 + config;
    res.phase[i] = Phase::filtering;
    if (strategy == Strategy::fixed) continue;
    if (std::isnan(baseline)) baseline = s;
    recent.push_back(s);
    recent_sum += s;
    if (static_cast<int>(recent.size()) > window) {
      recent_sum -= recent.front();
      recent.pop_front();
    }
    if (recent_sum / static_cast<double>(recent.size()) < baseline - ctx.drop_db) {
      sensing = true;
      sense_start = t + 1;
    }
  }
  return res;
}

std::vector<SweepPoint> sweep_snapshots(const Scenario& sc, const SimulationContext& ctx,
                                        const std::vector<int>& T_values, int trials, bool correlated,
                                        int threads) {
  if (trials < 1) throw ConfigError("trials", "at least one trial is required");
  check_complementary(ctx.arrays, ctx.geom.num_antennas());
  const int M = static_cast<int>(ctx.arrays.size());
  const std::size_t total = T_values.size() * static_cast<std::size_t>(trials);
  std::vector<double> rcas(total), coarray(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const int T = T_values[k / static_cast<std::size_t>(trials)];
      const std::uint64_t seed = derive_seed(ctx.seed, k);
      Scenario s = sc;
      if (correlated && s.num_interferences() > 0) {
        std::mt19937_64 rng(derive_seed(seed, 1));
        s.correlation = random_correlation(s.num_interferences(), rng);
      }
      CMat R = switched_collection(ctx.arrays, s, ctx.geom, T, derive_seed(seed, 2)).covariance.matrix;
      apply_loading_policy(R);
      const auto d1 = run_rasa(R, ctx.geom, ctx.groups, ctx.grid, ctx.pattern, ctx.rasa);
      rcas[k] = output_sinr(d1.w, s, ctx.geom);
      const CMat Ra = nested_covariance(s, ctx, M * T, derive_seed(seed, 3)).matrix;
      const auto d2 = run_rasa(Ra, ctx.geom, ctx.groups, ctx.grid, ctx.pattern, ctx.rasa);
      coarray[k] = output_sinr(d2.w, s, ctx.geom);
    }
  };
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::clamp(nt, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < T_values.size(); ++i) {
    SweepPoint p;
    p.T = T_values[i];
    p.trials = trials;
    const auto first = static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(trials));
    auto stats = [&](const std::vector<double>& v, double& mean, double& sd) {
      double s = 0.0, s2 = 0.0;
      for (int t = 0; t < trials; ++t) {
        const double x = v[static_cast<std::size_t>(first + t)];
        s += x;
        s2 += x * x;
      }
      mean = s / trials;
      sd = trials > 1 ? std::sqrt(std::max(0.0, (s2 - s * mean) / (trials - 1))) : 0.0;
    };
    stats(rcas, p.rcas_mean_db, p.rcas_std_db);
    stats(coarray, p.coarray_mean_db, p.coarray_std_db);
    out.push_back(p);
  }
  return out;
}

}  // namespace rcas
