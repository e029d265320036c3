#include <doctest.h>

#include <sstream>

#include "sumbrella/config.hpp"
#include "sumbrella/scenario.hpp"
#include "sumbrella/trace.hpp"

using namespace sumbrella;

TEST_CASE("minimal scenario gets defaults") {
  const Scenario sc = parse_scenario(R"({"meta":{"duration_s":1}})");
  CHECK(sc.meta.duration_s == 1.0);
  CHECK(sc.meta.tick_hz == 50);
  CHECK(sc.meta.perception_hz == 10);
  CHECK(sc.meta.seed == 0);
  CHECK(sc.events.empty());
  CHECK(sc.config_overrides.empty());
}

TEST_CASE("bundled demo scenario") {
  const Scenario sc = load_scenario_file(std::string(SUMBRELLA_SCENARIO_DIR) +
                                         "/approach_and_retreat.json");
  CHECK(sc.events.size() == 6);
  CHECK(sc.meta.duration_s == 20.0);
}

TEST_CASE("semantic errors name the offending event") {
  const char* negative_time = R"({"meta":{"duration_s":5},"events":[
    {"t": 1.0, "kind": "spawn_person", "id": 1, "dist_m": 1.0, "bearing_rad": 0.0},
    {"t": -1.0, "kind": "remove_person", "id": 1}
  ]})";
  CHECK_THROWS_WITH_AS(parse_scenario(negative_time),
                       doctest::Contains("events[1]"), ScenarioError);

  const char* unsorted = R"({"meta":{"duration_s":5},"events":[
    {"t": 2.0, "kind": "spawn_person", "id": 1, "dist_m": 1.0, "bearing_rad": 0.0},
    {"t": 1.0, "kind": "remove_person", "id": 1}
  ]})";
  CHECK_THROWS_WITH_AS(parse_scenario(unsorted), doctest::Contains("sorted"), ScenarioError);

  const char* unknown_preset = R"({"meta":{"duration_s":5},"events":[
    {"t": 1.0, "kind": "press_override", "preset": "sideways"}
  ]})";
  CHECK_THROWS_WITH_AS(parse_scenario(unknown_preset),
                       doctest::Contains("unknown preset"), ScenarioError);

  const char* beyond_duration = R"({"meta":{"duration_s":5},"events":[
    {"t": 6.0, "kind": "release_override"}
  ]})";
  CHECK_THROWS_WITH_AS(parse_scenario(beyond_duration),
                       doctest::Contains("duration"), ScenarioError);
}

TEST_CASE("strict mode rejects unknown keys") {
  CHECK_THROWS_AS(parse_scenario(R"({"meta":{"duration_s":1},"extra":{}})"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(R"({"meta":{"duration_s":1,"speed":9}})"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(R"({"meta":{"duration_s":1},"events":[
    {"t":0.5,"kind":"release_override","id":4}]})"),
                  ScenarioError);
}

TEST_CASE("liveness: ids must be unique among live entities") {
  const char* duplicate = R"({"meta":{"duration_s":5},"events":[
    {"t": 1.0, "kind": "spawn_person", "id": 1, "dist_m": 1.0, "bearing_rad": 0.0},
    {"t": 2.0, "kind": "spawn_obstacle", "id": 1, "dist_m": 0.4, "bearing_rad": 0.0}
  ]})";
  CHECK_THROWS_WITH_AS(parse_scenario(duplicate), doctest::Contains("already live"),
                       ScenarioError);

  const char* dead_move = R"({"meta":{"duration_s":5},"events":[
    {"t": 1.0, "kind": "move_person", "id": 9, "dist_m": 1.0, "bearing_rad": 0.0}
  ]})";
  CHECK_THROWS_WITH_AS(parse_scenario(dead_move), doctest::Contains("not live"),
                       ScenarioError);

  // Respawning a removed id is fine.
  const char* respawn = R"({"meta":{"duration_s":5},"events":[
    {"t": 1.0, "kind": "spawn_person", "id": 1, "dist_m": 1.0, "bearing_rad": 0.0},
    {"t": 2.0, "kind": "remove_person", "id": 1},
    {"t": 3.0, "kind": "spawn_person", "id": 1, "dist_m": 2.0, "bearing_rad": 0.5}
  ]})";
  CHECK(parse_scenario(respawn).events.size() == 3);
}

TEST_CASE("perception rate must divide the control rate") {
  CHECK_THROWS_AS(parse_scenario(R"({"meta":{"duration_s":1,"tick_hz":50,"perception_hz":7}})"),
                  ScenarioError);
}

TEST_CASE("config overrides are validated at parse time") {
  const Scenario sc = parse_scenario(
      R"({"meta":{"duration_s":1},"config_overrides":{"pneumatics.kp":0.2}})");
  CHECK(sc.config_overrides.at("pneumatics.kp") == 0.2);

  CHECK_THROWS_AS(
      parse_scenario(R"({"meta":{"duration_s":1},"config_overrides":{"nope.key":1}})"),
      ScenarioError);
}

TEST_CASE("config file parsing") {
  const Config cfg = parse_config(R"({
    "pneumatics": {"kp": 0.5, "deadband_kpa": 0.2},
    "behavior": {"wave_phase_rad": [0.1, 0.2, 0.3]}
  })");
  CHECK(cfg.pneumatics.kp == 0.5);
  CHECK(cfg.pneumatics.deadband_kpa == 0.2);
  CHECK(cfg.pneumatics.ki == 0.15);  // untouched default
  CHECK(cfg.behavior.wave.phase_rad[2] == 0.3);

  CHECK_THROWS_AS(parse_config(R"({"pneumatics":{"kP":1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"engines":{}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);

  Config base;
  apply_config_override(base, "cable.torque_threshold", 99.0);
  CHECK(base.cable.torque_threshold == 99.0);
  CHECK_THROWS_AS(apply_config_override(base, "cable.bogus", 1.0), ConfigError);
  CHECK_THROWS_AS(apply_config_override(base, "perception.debounce_frames", 2.5), ConfigError);
}

namespace {

std::vector<TraceRow> sample_trace() {
  std::vector<TraceRow> rows;
  for (int i = 0; i < 3; ++i) {
    TraceRow r;
    r.tick = i;
    r.t_s = 0.02 * i;
    r.fsm_mode = i == 2 ? "Avoidance(1)" : "Neutral";
    r.override_active = i == 1;
    r.persons_within = i;
    if (i > 0) r.min_dist_m = 1.23456789;
    r.obstacle_sectors = std::uint8_t(i);
    for (int leaf = 0; leaf < 3; ++leaf) {
      auto& lf = r.leaf[std::size_t(leaf)];
      lf.pressure_kpa = 7.6543210987 * (i + 1) + leaf;
      lf.popped = (i + leaf) % 2 == 0;
      lf.winch_pos = 123.456 * leaf;
      lf.curl_rad = 0.123456789 * i;
      lf.elev_rad = 0.987654321 * leaf;
      lf.route = (i + leaf) % 3;
      lf.pump_duty = 0.333333333 * leaf;
    }
    r.seq_timeout = i == 2;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("csv trace has a header plus one line per row") {
  const auto rows = sample_trace();
  const std::string text = trace_to_string(rows, TraceFormat::Csv);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.rfind("tick,t_s,fsm_mode,override_active,persons_within,min_dist_m,"
                   "obstacle_sectors,pressure_kpa_0,",
                   0) == 0);
  // Absent min_dist_m is an empty cell.
  CHECK(text.find("\n0,0,Neutral,0,0,,0,") != std::string::npos);
}

TEST_CASE("jsonl trace round-trips within formatting precision") {
  const auto rows = sample_trace();
  const std::string text = trace_to_string(rows, TraceFormat::Jsonl);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  std::istringstream in(text);
  const auto parsed = parse_trace_jsonl(in);
  REQUIRE(parsed.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].tick == rows[i].tick);
    CHECK(parsed[i].fsm_mode == rows[i].fsm_mode);
    CHECK(parsed[i].override_active == rows[i].override_active);
    CHECK(parsed[i].persons_within == rows[i].persons_within);
    CHECK(parsed[i].min_dist_m.has_value() == rows[i].min_dist_m.has_value());
    if (rows[i].min_dist_m) {
      CHECK(*parsed[i].min_dist_m ==
            doctest::Approx(*rows[i].min_dist_m).epsilon(1e-5));
    }
    for (int leaf = 0; leaf < 3; ++leaf) {
      const auto& a = parsed[i].leaf[std::size_t(leaf)];
      const auto& b = rows[i].leaf[std::size_t(leaf)];
      CHECK(a.pressure_kpa == doctest::Approx(b.pressure_kpa).epsilon(1e-5));
      CHECK(a.popped == b.popped);
      CHECK(a.route == b.route);
      CHECK(a.pump_duty == doctest::Approx(b.pump_duty).epsilon(1e-5));
    }
    CHECK(parsed[i].seq_timeout == rows[i].seq_timeout);
  }
}

TEST_CASE("empty trace is refused") {
  CHECK_THROWS_AS((void)trace_to_string({}, TraceFormat::Csv), std::invalid_argument);
}
