#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oddflow/scenario.hpp"
#include "oddflow/snapshot.hpp"

using namespace oddflow;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json steady_custom(const std::filesystem::path& dir, const std::string& prefix) {
  return {{"scenario", "custom"},
          {"N", 32},
          {"T", 0.4},
          {"records", 12},
          {"probe_every", 4},
          {"custom", {{"modes", {{1, 1, 1.0}}}, {"x0", {0.2, 0.3}}, {"box_side", 1.0}}},
          {"output", {{"dir", dir.string()}, {"prefix", prefix}}}};
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("strict config parsing") {
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"scenario", "part_i"}, {"resolution", 64}}), ConfigError);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"N", "many"}}), ConfigError);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"monitors", {{"sup", 1}}}}), ConfigError);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"scenario", "part_iii"}}), ConfigError);
  const ScenarioConfig c = ScenarioConfig::from_json({{"scenario", "part_ii"}, {"delta", 0.1}, {"N", 128}});
  CHECK(c.scenario == DataKind::PartII);
  CHECK(c.delta.value() == 0.1);
  CHECK_FALSE(c.a.has_value());
  const ScenarioConfig back = ScenarioConfig::from_json(c.to_json());
  CHECK(back.hash() == c.hash());
}

TEST_CASE("hash ignores output location but not parameters") {
  ScenarioConfig a;
  ScenarioConfig b = a;
  b.output_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.delta = 0.02;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("closed forms for a and delta") {
  CHECK(a_formula(DataKind::PartI, 1.0, 1.0, 0.5) == doctest::Approx(6.0));
  CHECK(a_formula(DataKind::PartII, 2.0, 1.0, 0.5) == doctest::Approx(3.0));
  CHECK(delta_formula(DataKind::PartI, 1.0, 1.0, 3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
  CHECK(delta_formula(DataKind::PartI, 1.0, 0.1, 1.01) == 0.1);
  CHECK(delta_formula(DataKind::PartII, 1.0, 1.0, 2.0) == doctest::Approx(std::exp(-3.0)));
}

TEST_CASE("parameter schedule and guards") {
  ScenarioConfig c;
  c.scenario = DataKind::PartI;
  c.delta = 0.05;
  c.a = 1.2;
  c.N = 512;
  const ResolvedParameters p = resolve(c);
  CHECK(p.T0 == doctest::Approx(std::abs(std::log(0.05))));
  CHECK(p.T == p.T0);
  CHECK(p.x0[0] == doctest::Approx(std::exp(-1.2 * p.T)));
  CHECK(p.box_side == doctest::Approx(0.05));

  c.T = 1.0;
  CHECK_THROWS_AS(resolve(c), ConfigError);
  c.T.reset();
  c.a = 1.0;
  CHECK_THROWS_AS(resolve(c), ConfigError);
  c.a = 3.0;
  try {
    resolve(c);
    FAIL("expected the feasibility guard");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid cell") != std::string::npos);
  }

  ScenarioConfig q;
  q.scenario = DataKind::PartII;
  q.delta = 0.1;
  q.a = 1.2;
  q.N = 512;
  const ResolvedParameters r = resolve(q);
  CHECK(r.T0 == doctest::Approx(std::abs(std::log(0.025))));
  CHECK(r.x0[0] == doctest::Approx(std::exp(-r.T)));
  CHECK(r.x0[1] == doctest::Approx(std::exp(-1.4 * r.T)));
}

TEST_CASE("a steady custom run writes complete, deterministic outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "oddflow_unit_scenario";
  std::filesystem::remove_all(dir);
  const ScenarioConfig c = ScenarioConfig::from_json(steady_custom(dir, "a"));
  const RunSummary s = run_scenario(c);
  CHECK(s.ok());
  CHECK(s.final_t == doctest::Approx(0.4));
  CHECK_FALSE(s.t_star.has_value());
  CHECK(s.transport_drift < 1e-8);
  REQUIRE(s.scorecard.size() == 7);
  CHECK(s.scorecard[0].name == "transport_identity");
  CHECK(s.scorecard[0].verdict == Verdict::Holds);
  CHECK(s.scorecard[4].verdict == Verdict::Untestable);
  for (const char* ext : {".diagnostics.csv", ".trajectory.csv", ".summary.json", ".t0.snap", ".tmid.snap", ".tend.snap"}) {
    CHECK(std::filesystem::exists(dir / (std::string("a") + ext)));
  }
  const json summary = json::parse(slurp(dir / "a.summary.json"));
  CHECK(summary["config_hash"] == c.hash());
  CHECK(summary["scorecard"].size() == 7);
  CHECK(read_snapshot(dir / "a.tmid.snap").time == doctest::Approx(0.2));
  CHECK(slurp(dir / "a.diagnostics.csv").rfind("# config_hash=" + c.hash(), 0) == 0);

  run_scenario(ScenarioConfig::from_json(steady_custom(dir, "b")));
  CHECK(slurp(dir / "a.diagnostics.csv") == slurp(dir / "b.diagnostics.csv"));
  CHECK(slurp(dir / "a.trajectory.csv") == slurp(dir / "b.trajectory.csv"));
}

TEST_CASE("sweeps isolate failing runs") {
  const auto dir = std::filesystem::temp_directory_path() / "oddflow_unit_sweep";
  std::filesystem::remove_all(dir);
  json spec = {{"base", steady_custom(dir, "s")}, {"grid", {{"T", {0.2, -1.0}}}}};
  const auto entries = sweep(SweepSpec::from_json(spec), 2);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].summary.has_value());
  CHECK_FALSE(entries[1].summary.has_value());
  CHECK_FALSE(entries[1].error.empty());
  {
    std::ifstream csv(dir / "s.sweep.csv");
    std::string header, line;
    std::getline(csv, header);
    const auto cols = std::count(header.begin(), header.end(), ',');
    int rows = 0;
    while (std::getline(csv, line)) {
      CHECK(std::count(line.begin(), line.end(), ',') == cols);
      ++rows;
    }
    CHECK(rows == 2);
  }

  json one = {{"base", steady_custom(dir, "g")}, {"grid", {{"T", {0.4}}}}};
  const auto single = sweep(SweepSpec::from_json(one), 1);
  const RunSummary direct = run_scenario(ScenarioConfig::from_json(steady_custom(dir, "d")));
  CHECK(single[0].summary->config_hash == direct.config_hash);
  CHECK(slurp(dir / "g_0.diagnostics.csv") == slurp(dir / "d.diagnostics.csv"));
}

TEST_CASE("verify suites") {
  for (const CheckResult& c : verify("symmetry")) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
  CHECK_THROWS_AS(verify("everything"), ConfigError);
}

}
