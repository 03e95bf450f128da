#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rcas/array_model.hpp"
#include "rcas/beamform.hpp"
#include "rcas/dcsa.hpp"
#include "rcas/rasa.hpp"
#include "rcas/signal_env.hpp"
#include "rcas/simulation.hpp"

namespace rcas::cli {

struct ArrayConfig {
  int num_antennas = 16;
  int group_size = 2;
  double spacing_wavelengths = 0.25;
  double steer_angle_deg = 0.0;
};

struct PatternConfig {
  std::vector<std::pair<double, double>> sidelobe_regions{{-90.0, -12.0}, {12.0, 90.0}};
  double desired_sll_db = -15.0;
  double grid_step_deg = 1.0;
  /// Template of the complementary split when it differs from the combined
  /// beamforming template.
  std::optional<double> split_sll_db;

  double split_level_db() const { return split_sll_db.value_or(desired_sll_db); }
};

struct InterferenceConfig {
  double angle_deg = 0.0;
  double inr_db = 0.0;
};

enum class CorrelationMode { none, random_per_trial, random_seeded };

struct ScenarioConfig {
  double source_angle_deg = 0.0;
  double source_power = 1.0;
  std::vector<InterferenceConfig> interferences;
  double noise_power = 1.0;
  CorrelationMode correlation = CorrelationMode::none;
  std::uint64_t correlation_seed = 0;
};

struct AlgorithmConfig {
  double rho = 1.0;
  std::optional<double> beta;  ///< absent: tr(R) / (N tr(A_s A_s^H))
  double kappa = l0::kDefaultKappa;
  double zeta = l0::kDefaultZeta;
  double gamma = kDefaultGamma;
  int restarts = 10;
  double tol = 1e-5;
  int max_outer_iter = 50;
};

struct SegmentConfig {
  int duration = 0;  ///< samples
  std::vector<InterferenceConfig> interferences;
};

enum class CovarianceSource { theoretical, switched, augmented };

struct SimulationConfig {
  int T = 500;
  int trials = 200;
  std::uint64_t seed = 1;
  std::vector<SegmentConfig> timeline;
  CovarianceSource covariance_source = CovarianceSource::theoretical;
  std::vector<int> snapshot_counts;  ///< empty: 10, 110, ..., 1910
  std::vector<std::vector<int>> complementary_arrays;  ///< empty: designed by DCSA
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"json", "csv"};

  bool wants(const std::string& format) const;
};

struct RunConfig {
  ArrayConfig array;
  PatternConfig pattern;
  ScenarioConfig scenario;
  AlgorithmConfig algorithm;
  SimulationConfig simulation;
  OutputConfig output;

  ArrayGeometry geometry() const;
  GroupStructure groups() const;
  AngleGrid grid() const;
  /// Desired pattern over the sidelobe angles at `level_db`.
  DesiredPattern pattern_at(double level_db) const;
  /// Linear-power scenario; `interferences` overrides the configured list.
  Scenario make_scenario(const std::vector<InterferenceConfig>* interferences = nullptr) const;
  bool correlated() const { return scenario.correlation != CorrelationMode::none; }
  DcsaOptions dcsa_options() const;
  RasaOptions rasa_options() const;
  std::vector<int> snapshot_counts() const;
};

/// Strict parse: unknown fields, wrong types and out-of-domain values throw
/// ConfigError naming the dotted field path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Canonical form of a parsed config (every field, defaults filled in).
nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a 64 of the canonical JSON text without the output block, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

const char* to_string(CovarianceSource s);

}  // namespace rcas::cli
