#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace rcas::cli {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }
  const json& get(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = get(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(at(key), "must be finite");
  }
  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const auto& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    out = v.get<int>();
  }
  void seed(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = get(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(at(key), "expected a nonnegative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    out = v.get<std::string>();
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& array_at(Fields& f, const std::string& key) {
  const auto& v = f.get(key);
  if (!v.is_array()) throw ConfigError(f.at(key), "expected a list");
  return v;
}

std::vector<InterferenceConfig> parse_interferences(const json& list, const std::string& path) {
  if (!list.is_array()) throw ConfigError(path, "expected a list");
  std::vector<InterferenceConfig> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Fields f(list[i], item(path, i));
    InterferenceConfig ic;
    if (!f.has("angle_deg")) throw ConfigError(f.at("angle_deg"), "required");
    f.number("angle_deg", ic.angle_deg);
    f.number("inr_db", ic.inr_db);
    f.finish();
    if (std::abs(ic.angle_deg) > 90.0) throw ConfigError(f.at("angle_deg"), "must lie in [-90, 90]");
    out.push_back(ic);
  }
  return out;
}

void parse_array(Fields& root, RunConfig& cfg) {
  if (!root.has("array")) return;
  Fields f(root.get("array"), "array");
  auto& a = cfg.array;
  f.integer("num_antennas", a.num_antennas);
  f.integer("group_size", a.group_size);
  f.number("spacing_wavelengths", a.spacing_wavelengths);
  f.number("steer_angle_deg", a.steer_angle_deg);
  f.finish();
  if (a.num_antennas < 2) throw ConfigError("array.num_antennas", "need at least two antennas");
  if (a.group_size < 1) throw ConfigError("array.group_size", "must be positive");
  if (a.num_antennas % a.group_size != 0) {
    throw ConfigError("array.group_size", "must divide array.num_antennas (" + std::to_string(a.group_size) +
                                              " does not divide " + std::to_string(a.num_antennas) + ")");
  }
  if (!(a.spacing_wavelengths > 0.0)) throw ConfigError("array.spacing_wavelengths", "must be positive");
  if (std::abs(a.steer_angle_deg) >= 90.0) throw ConfigError("array.steer_angle_deg", "must lie in (-90, 90)");
}

void parse_pattern(Fields& root, RunConfig& cfg) {
  if (!root.has("pattern")) return;
  Fields f(root.get("pattern"), "pattern");
  auto& p = cfg.pattern;
  if (f.has("sidelobe_regions")) {
    const auto& list = array_at(f, "sidelobe_regions");
    p.sidelobe_regions.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& r = list[i];
      const auto path = item("pattern.sidelobe_regions", i);
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
        throw ConfigError(path, "expected [lo, hi] in degrees");
      }
      const double lo = r[0].get<double>();
      const double hi = r[1].get<double>();
      if (!(lo < hi) || lo < -90.0 || hi > 90.0) throw ConfigError(path, "need -90 <= lo < hi <= 90");
      p.sidelobe_regions.emplace_back(lo, hi);
    }
    if (p.sidelobe_regions.empty()) throw ConfigError("pattern.sidelobe_regions", "at least one region is required");
  }
  f.number("desired_sll_db", p.desired_sll_db);
  f.number("grid_step_deg", p.grid_step_deg);
  if (f.has("split_sll_db")) {
    double v = 0.0;
    f.number("split_sll_db", v);
    p.split_sll_db = v;
  }
  f.finish();
  if (!(p.grid_step_deg > 0.0) || p.grid_step_deg > 90.0) throw ConfigError("pattern.grid_step_deg", "must lie in (0, 90]");
}

void parse_scenario(Fields& root, RunConfig& cfg) {
  if (!root.has("scenario")) return;
  Fields f(root.get("scenario"), "scenario");
  auto& s = cfg.scenario;
  if (f.has("source")) {
    Fields src(f.get("source"), "scenario.source");
    src.number("angle_deg", s.source_angle_deg);
    src.number("power", s.source_power);
    src.finish();
    if (s.source_power < 0.0) throw ConfigError("scenario.source.power", "must be nonnegative");
    if (std::abs(s.source_angle_deg) > 90.0) throw ConfigError("scenario.source.angle_deg", "must lie in [-90, 90]");
  }
  if (f.has("interferences")) s.interferences = parse_interferences(f.get("interferences"), "scenario.interferences");
  f.number("noise_power", s.noise_power);
  if (!(s.noise_power > 0.0)) throw ConfigError("scenario.noise_power", "must be positive");
  if (f.has("correlation")) {
    std::string text;
    f.text("correlation", text);
    static const std::regex seeded(R"(random\((\d+)\))");
    std::smatch m;
    if (text == "none") {
      s.correlation = CorrelationMode::none;
    } else if (text == "random") {
      s.correlation = CorrelationMode::random_per_trial;
    } else if (std::regex_match(text, m, seeded)) {
      s.correlation = CorrelationMode::random_seeded;
      s.correlation_seed = std::stoull(m[1].str());
    } else {
      throw ConfigError("scenario.correlation", "expected \"none\", \"random\" or \"random(<seed>)\", got \"" + text + "\"");
    }
  }
  f.finish();
}

void parse_algorithm(Fields& root, RunConfig& cfg) {
  if (!root.has("algorithm")) return;
  Fields f(root.get("algorithm"), "algorithm");
  auto& a = cfg.algorithm;
  f.number("rho", a.rho);
  if (f.has("beta")) {
    double b = 0.0;
    f.number("beta", b);
    a.beta = b;
  }
  f.number("kappa", a.kappa);
  f.number("zeta", a.zeta);
  f.number("gamma", a.gamma);
  f.integer("restarts", a.restarts);
  f.number("tol", a.tol);
  f.integer("max_outer_iter", a.max_outer_iter);
  f.finish();
  if (!(a.rho >= 0.0)) throw ConfigError("algorithm.rho", "must be nonnegative");
  if (a.beta && !(*a.beta >= 0.0)) throw ConfigError("algorithm.beta", "must be nonnegative");
  if (!(a.kappa > 0.0 && a.kappa < 1.0)) throw ConfigError("algorithm.kappa", "must lie in (0, 1)");
  if (!(a.zeta > 0.0)) throw ConfigError("algorithm.zeta", "must be positive");
  if (!(a.gamma > 0.0)) throw ConfigError("algorithm.gamma", "must be positive");
  if (a.restarts < 1) throw ConfigError("algorithm.restarts", "must be at least 1");
  if (!(a.tol > 0.0)) throw ConfigError("algorithm.tol", "must be positive");
  if (a.max_outer_iter < 1) throw ConfigError("algorithm.max_outer_iter", "must be at least 1");
}

CovarianceSource parse_source(const std::string& text) {
  if (text == "theoretical") return CovarianceSource::theoretical;
  if (text == "switched") return CovarianceSource::switched;
  if (text == "augmented") return CovarianceSource::augmented;
  throw ConfigError("simulation.covariance_source",
                    "expected theoretical, switched or augmented, got \"" + text + "\"");
}

void parse_simulation(Fields& root, RunConfig& cfg) {
  if (!root.has("simulation")) return;
  Fields f(root.get("simulation"), "simulation");
  auto& s = cfg.simulation;
  f.integer("T", s.T);
  f.integer("trials", s.trials);
  f.seed("seed", s.seed);
  if (f.has("timeline")) {
    const auto& list = array_at(f, "timeline");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto path = item("simulation.timeline", i);
      Fields seg(list[i], path);
      SegmentConfig sc;
      if (!seg.has("duration")) throw ConfigError(seg.at("duration"), "required");
      seg.integer("duration", sc.duration);
      if (sc.duration < 1) throw ConfigError(seg.at("duration"), "must be positive");
      if (seg.has("interferences")) sc.interferences = parse_interferences(seg.get("interferences"), seg.at("interferences"));
      seg.finish();
      s.timeline.push_back(std::move(sc));
    }
  }
  if (f.has("covariance_source")) {
    std::string text;
    f.text("covariance_source", text);
    s.covariance_source = parse_source(text);
  }
  if (f.has("snapshot_counts")) {
    const auto& list = array_at(f, "snapshot_counts");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_number_integer() || list[i].get<int>() < 1) {
        throw ConfigError(item("simulation.snapshot_counts", i), "expected a positive integer");
      }
      s.snapshot_counts.push_back(list[i].get<int>());
    }
  }
  if (f.has("complementary_arrays")) {
    const auto& list = array_at(f, "complementary_arrays");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto path = item("simulation.complementary_arrays", i);
      if (!list[i].is_array()) throw ConfigError(path, "expected a list of antenna indices");
      std::vector<int> arr;
      for (const auto& v : list[i]) {
        if (!v.is_number_integer()) throw ConfigError(path, "expected integer antenna indices");
        arr.push_back(v.get<int>());
      }
      s.complementary_arrays.push_back(std::move(arr));
    }
  }
  f.finish();
  if (s.T < 1) throw ConfigError("simulation.T", "must be positive");
  if (s.trials < 1) throw ConfigError("simulation.trials", "must be positive");
}

void parse_output(Fields& root, RunConfig& cfg) {
  if (!root.has("output")) return;
  Fields f(root.get("output"), "output");
  auto& o = cfg.output;
  f.text("directory", o.directory);
  if (f.has("formats")) {
    const auto& list = array_at(f, "formats");
    o.formats.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string() || (list[i] != "json" && list[i] != "csv")) {
        throw ConfigError(item("output.formats", i), "expected \"json\" or \"csv\"");
      }
      o.formats.push_back(list[i].get<std::string>());
    }
  }
  f.finish();
  if (o.directory.empty()) throw ConfigError("output.directory", "must not be empty");
}

void check_consistency(const RunConfig& cfg) {
  const auto grid = cfg.grid();
  if (grid.num_sidelobe() == 0) throw ConfigError("pattern.sidelobe_regions", "no grid angle falls inside the regions");
  for (std::size_t m = 0; m < cfg.simulation.complementary_arrays.size(); ++m) {
    for (int a : cfg.simulation.complementary_arrays[m]) {
      if (a < 0 || a >= cfg.array.num_antennas) {
        throw ConfigError(item("simulation.complementary_arrays", m), "antenna index " + std::to_string(a) + " out of range");
      }
    }
  }
  if (!cfg.simulation.complementary_arrays.empty()) {
    try {
      check_complementary(cfg.simulation.complementary_arrays, cfg.array.num_antennas);
    } catch (const DomainError& e) {
      throw ConfigError("simulation.complementary_arrays", e.what());
    }
  }
  try {
    cfg.make_scenario().validate();
  } catch (const DomainError& e) {
    throw ConfigError("scenario", e.what());
  }
}

}  // namespace

bool OutputConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ArrayGeometry RunConfig::geometry() const {
  return ArrayGeometry::uniform(array.num_antennas, array.spacing_wavelengths, array.steer_angle_deg);
}

GroupStructure RunConfig::groups() const { return GroupStructure(array.num_antennas, array.group_size); }

AngleGrid RunConfig::grid() const { return AngleGrid::from_regions(pattern.sidelobe_regions, pattern.grid_step_deg); }

DesiredPattern RunConfig::pattern_at(double level_db) const {
  return DesiredPattern::uniform(grid().num_sidelobe(), level_db);
}

Scenario RunConfig::make_scenario(const std::vector<InterferenceConfig>* interferences) const {
  Scenario sc;
  sc.source_angle_deg = scenario.source_angle_deg;
  sc.source_power = scenario.source_power;
  sc.noise_power = scenario.noise_power;
  for (const auto& ic : interferences ? *interferences : scenario.interferences) {
    sc.interferences.push_back({ic.angle_deg, scenario.noise_power * db_to_linear_power(ic.inr_db)});
  }
  if (scenario.correlation == CorrelationMode::random_seeded && !sc.interferences.empty()) {
    std::mt19937_64 rng(scenario.correlation_seed);
    sc.correlation = random_correlation(sc.num_interferences(), rng);
  }
  return sc;
}

DcsaOptions RunConfig::dcsa_options() const {
  DcsaOptions o;
  o.rho = algorithm.rho;
  o.kappa = algorithm.kappa;
  o.zeta = algorithm.zeta;
  o.restarts = algorithm.restarts;
  o.seed = simulation.seed;
  o.max_outer_iter = algorithm.max_outer_iter;
  o.tol = algorithm.tol;
  return o;
}

RasaOptions RunConfig::rasa_options() const {
  RasaOptions o;
  o.beta = algorithm.beta.value_or(-1.0);
  o.rho = algorithm.rho;
  o.kappa = algorithm.kappa;
  o.zeta = algorithm.zeta;
  o.gamma = algorithm.gamma;
  o.max_iter = algorithm.max_outer_iter;
  return o;
}

std::vector<int> RunConfig::snapshot_counts() const {
  if (!simulation.snapshot_counts.empty()) return simulation.snapshot_counts;
  std::vector<int> out;
  for (int T = 10; T <= 1910; T += 100) out.push_back(T);
  return out;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Fields root(doc, "");
  parse_array(root, cfg);
  parse_pattern(root, cfg);
  parse_scenario(root, cfg);
  parse_algorithm(root, cfg);
  parse_simulation(root, cfg);
  parse_output(root, cfg);
  root.finish();
  check_consistency(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed document: ") + e.what());
  }
  return parse_config(doc);
}

const char* to_string(CovarianceSource s) {
  switch (s) {
    case CovarianceSource::theoretical: return "theoretical";
    case CovarianceSource::switched: return "switched";
    case CovarianceSource::augmented: return "augmented";
  }
  return "?";
}

json to_json(const RunConfig& cfg) {
  auto interferences = [](const std::vector<InterferenceConfig>& list) {
    json out = json::array();
    for (const auto& ic : list) out.push_back({{"angle_deg", ic.angle_deg}, {"inr_db", ic.inr_db}});
    return out;
  };
  json regions = json::array();
  for (const auto& [lo, hi] : cfg.pattern.sidelobe_regions) regions.push_back({lo, hi});
  json pattern = {{"sidelobe_regions", regions},
                  {"desired_sll_db", cfg.pattern.desired_sll_db},
                  {"grid_step_deg", cfg.pattern.grid_step_deg}};
  if (cfg.pattern.split_sll_db) pattern["split_sll_db"] = *cfg.pattern.split_sll_db;

  std::string corr = "none";
  if (cfg.scenario.correlation == CorrelationMode::random_per_trial) corr = "random";
  if (cfg.scenario.correlation == CorrelationMode::random_seeded) {
    corr = "random(" + std::to_string(cfg.scenario.correlation_seed) + ")";
  }
  json algorithm = {{"rho", cfg.algorithm.rho},         {"kappa", cfg.algorithm.kappa},
                    {"zeta", cfg.algorithm.zeta},       {"gamma", cfg.algorithm.gamma},
                    {"restarts", cfg.algorithm.restarts}, {"tol", cfg.algorithm.tol},
                    {"max_outer_iter", cfg.algorithm.max_outer_iter}};
  algorithm["beta"] = cfg.algorithm.beta ? json(*cfg.algorithm.beta) : json(nullptr);

  json timeline = json::array();
  for (const auto& seg : cfg.simulation.timeline) {
    timeline.push_back({{"duration", seg.duration}, {"interferences", interferences(seg.interferences)}});
  }
  return {
      {"array",
       {{"num_antennas", cfg.array.num_antennas},
        {"group_size", cfg.array.group_size},
        {"spacing_wavelengths", cfg.array.spacing_wavelengths},
        {"steer_angle_deg", cfg.array.steer_angle_deg}}},
      {"pattern", pattern},
      {"scenario",
       {{"source", {{"angle_deg", cfg.scenario.source_angle_deg}, {"power", cfg.scenario.source_power}}},
        {"interferences", interferences(cfg.scenario.interferences)},
        {"noise_power", cfg.scenario.noise_power},
        {"correlation", corr}}},
      {"algorithm", algorithm},
      {"simulation",
       {{"T", cfg.simulation.T},
        {"trials", cfg.simulation.trials},
        {"seed", cfg.simulation.seed},
        {"timeline", timeline},
        {"covariance_source", to_string(cfg.simulation.covariance_source)},
        {"snapshot_counts", cfg.simulation.snapshot_counts},
        {"complementary_arrays", cfg.simulation.complementary_arrays}}},
      {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}},
  };
}

std::string config_hash(const RunConfig& cfg) {
  json doc = to_json(cfg);
  doc.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rcas::cli
