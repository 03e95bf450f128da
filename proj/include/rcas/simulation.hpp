#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rcas/array_model.hpp"
#include "rcas/beamform.hpp"
#include "rcas/rasa.hpp"
#include "rcas/signal_env.hpp"

namespace rcas {

struct Segment {
  Scenario scenario;
  int duration = 0;  ///< samples
};

enum class Strategy { fixed, rcas, coarray };

const char* to_string(Strategy s);
/// Throws ConfigError("strategy", ...) on unknown names.
Strategy parse_strategy(const std::string& name);

/// Everything a strategy needs besides the timeline.
struct SimulationContext {
  ArrayGeometry geom;
  GroupStructure groups;
  AngleGrid grid;
  DesiredPattern pattern;                 ///< combined-beamforming template
  std::vector<std::vector<int>> arrays;   ///< complementary set used for sensing
  std::vector<int> nested;                ///< sensing array of the coarray strategy
  RasaOptions rasa;
  int T = 500;                            ///< samples per complementary array
  double drop_db = 3.0;
  std::uint64_t seed = 1;
  /// Selection and weights held by the fixed strategy; designed from the
  /// first segment's theoretical covariance when absent.
  std::optional<AdaptiveDesign> fixed_design;
};

enum class Phase { sensing, filtering };

struct Reconfiguration {
  int sample_index = 0;
  std::vector<int> selection;
};

/// Array ids: 0..M-1 the complementary arrays, M the nested array, M + 1 + k
/// the k-th adaptive configuration.
struct SimulationResult {
  Strategy strategy = Strategy::fixed;
  std::vector<double> sinr_db;  ///< per sample
  std::vector<int> array_id;
  std::vector<Phase> phase;
  std::vector<Reconfiguration> reconfigurations;

  /// CSV "sample_index,sinr_db,active_array_id,phase", one row every `block` samples.
  void write_csv(std::ostream& out, int block = 1) const;
};

/// Per-sample operation over the timeline. Sensing windows last M T samples
/// and happen at the start and after each detected drop: the realized SINR
/// averaged over the last 2 T samples falling `drop_db` below the value
/// measured right after the last design.
SimulationResult dynamic_simulation(const std::vector<Segment>& timeline, Strategy strategy,
                                    const SimulationContext& ctx);

/// The fixed strategy's design: run_rasa on the theoretical covariance of sc.
AdaptiveDesign design_for_scenario(const Scenario& sc, const SimulationContext& ctx);

/// Covariance the coarray strategy builds from `samples` nested-array snapshots.
CovarianceEstimate nested_covariance(const Scenario& sc, const SimulationContext& ctx, int samples,
                                     std::uint64_t seed);

struct SweepPoint {
  int T = 0;
  double rcas_mean_db = 0.0;
  double coarray_mean_db = 0.0;
  double rcas_std_db = 0.0;
  double coarray_std_db = 0.0;
  int trials = 0;
};

/// Mean output SINR of the designs obtained by switched sensing (T per
/// array) and by nested sensing (M T samples) plus augmentation. With
/// `correlated`, each trial draws a random interference correlation.
std::vector<SweepPoint> sweep_snapshots(const Scenario& sc, const SimulationContext& ctx,
                                        const std::vector<int>& T_values, int trials, bool correlated,
                                        int threads = 0);

}  // namespace rcas
