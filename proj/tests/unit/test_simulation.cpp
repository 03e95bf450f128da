#include <sstream>

#include "doctest.h"
#include "rcas/baselines.hpp"
#include "rcas/simulation.hpp"

using namespace rcas;

namespace {

SimulationContext small_context(int T) {
  const std::vector<std::pair<double, double>> regions{{-90.0, -12.0}, {12.0, 90.0}};
  SimulationContext ctx{ArrayGeometry::uniform(16, 0.25, 0.0),
                        make_groups(16, 2),
                        AngleGrid::from_regions(regions, 1.0),
                        DesiredPattern{},
                        {{0, 2, 4, 6, 8, 10, 12, 14}, {1, 3, 5, 7, 9, 11, 13, 15}},
                        nested_array(8, 16),
                        RasaOptions{},
                        T,
                        3.0,
                        5,
                        std::nullopt};
  ctx.pattern = DesiredPattern::uniform(ctx.grid.num_sidelobe(), -5.0);
  return ctx;
}

Scenario two_interferers() {
  Scenario sc;
  sc.interferences = {{-28.0, 100.0}, {25.0, 100.0}};
  return sc;
}

}  // namespace

TEST_CASE("strategy names") {
  for (auto s : {Strategy::fixed, Strategy::rcas, Strategy::coarray}) CHECK(parse_strategy(to_string(s)) == s);
  try {
    parse_strategy("greedy");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "strategy");
  }
}

TEST_CASE("single-segment fixed run is flat") {
  const auto ctx = small_context(20);
  const auto res = dynamic_simulation({{two_interferers(), 400}}, Strategy::fixed, ctx);
  REQUIRE(res.sinr_db.size() == 400);
  CHECK(std::all_of(res.sinr_db.begin(), res.sinr_db.end(), [&](double v) { return v == res.sinr_db.front(); }));
  CHECK(res.reconfigurations.size() == 1);
  CHECK(res.phase.front() == Phase::filtering);
  CHECK(res.array_id.front() == 3);
}

TEST_CASE("rcas senses each array for T samples, then filters flat") {
  const int T = 20;
  const auto ctx = small_context(T);
  const auto res = dynamic_simulation({{two_interferers(), 400}}, Strategy::rcas, ctx);
  for (int t = 0; t < 2 * T; ++t) {
    CHECK(res.phase[static_cast<std::size_t>(t)] == Phase::sensing);
    CHECK(res.array_id[static_cast<std::size_t>(t)] == t / T);
  }
  REQUIRE(res.reconfigurations.size() == 1);
  CHECK(res.reconfigurations.front().sample_index == 2 * T);
  for (std::size_t t = 2 * T; t < res.sinr_db.size(); ++t) {
    CHECK(res.phase[t] == Phase::filtering);
    CHECK(res.sinr_db[t] == res.sinr_db[2 * T]);
  }
  const auto again = dynamic_simulation({{two_interferers(), 400}}, Strategy::rcas, ctx);
  CHECK(again.sinr_db == res.sinr_db);
}

TEST_CASE("coarray strategy senses with the nested array") {
  const int T = 20;
  const auto ctx = small_context(T);
  const auto res = dynamic_simulation({{two_interferers(), 200}}, Strategy::coarray, ctx);
  CHECK(res.array_id.front() == 2);
  CHECK(res.phase[2 * T - 1] == Phase::sensing);
  CHECK(res.phase[2 * T] == Phase::filtering);
}

TEST_CASE("environment change triggers a new sensing window") {
  const int T = 20;
  const auto ctx = small_context(T);
  Scenario moved;
  moved.interferences = {{-31.0, 100.0}, {-12.0, 100.0}, {10.0, 100.0}, {50.0, 100.0}};
  const auto fixed = dynamic_simulation({{two_interferers(), 300}, {moved, 300}}, Strategy::fixed, ctx);
  CHECK(fixed.sinr_db.back() < fixed.sinr_db.front() - 3.0);
  const auto res = dynamic_simulation({{two_interferers(), 300}, {moved, 300}}, Strategy::rcas, ctx);
  CHECK(res.reconfigurations.size() == 2);
  CHECK(res.reconfigurations[1].sample_index > 300);
}

TEST_CASE("trace csv") {
  const auto ctx = small_context(10);
  const auto res = dynamic_simulation({{two_interferers(), 50}}, Strategy::rcas, ctx);
  std::ostringstream out;
  res.write_csv(out, 10);
  const std::string s = out.str();
  CHECK(s.rfind("sample_index,sinr_db,active_array_id,phase\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 6);
  CHECK(s.find(",sensing\n") != std::string::npos);
  CHECK(s.find(",filtering\n") != std::string::npos);
  CHECK_THROWS_AS(res.write_csv(out, 0), DomainError);
}

TEST_CASE("sweep smoke run") {
  const auto ctx = small_context(10);
  Scenario sc;
  sc.interferences = {{-28.0, 100.0}, {-12.0, 100.0}, {10.0, 100.0}, {25.0, 100.0}};
  const auto pts = sweep_snapshots(sc, ctx, {10, 60}, 1, true);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].T == 10);
  CHECK(pts[1].trials == 1);
  CHECK(pts[0].rcas_std_db == 0.0);
  CHECK(sweep_snapshots(sc, ctx, {10, 60}, 1, true)[1].rcas_mean_db == pts[1].rcas_mean_db);
  CHECK_THROWS_AS(sweep_snapshots(sc, ctx, {10}, 0, true), ConfigError);
}
