#include "sumbrella/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sumbrella {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError("scenario: " + path + ": " + what);
}

double require_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path, std::string("missing '") + key + "'");
  if (!j[key].is_number()) fail(path + "." + key, "must be a number");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) fail(path + "." + key, "must be finite");
  return v;
}

int require_int(const json& j, const std::string& path, const char* key) {
  const double v = require_number(j, path, key);
  if (v != std::floor(v)) fail(path + "." + key, "must be an integer");
  return int(v);
}

Preset parse_preset(const std::string& name, const std::string& path) {
  if (name == "welcoming") return Preset::Welcoming;
  if (name == "withdrawal") return Preset::Withdrawal;
  if (name == "waving") return Preset::Waving;
  fail(path, "unknown preset '" + name + "'");
}

struct EventSpec {
  ScenarioEvent::Kind kind;
  bool has_id;
  bool has_pose;  // dist_m + bearing_rad
  bool has_preset;
};

const EventSpec* event_spec(const std::string& kind) {
  static const std::map<std::string, EventSpec> specs = {
      {"spawn_person", {ScenarioEvent::Kind::SpawnPerson, true, true, false}},
      {"move_person", {ScenarioEvent::Kind::MovePerson, true, true, false}},
      {"remove_person", {ScenarioEvent::Kind::RemovePerson, true, false, false}},
      {"spawn_obstacle", {ScenarioEvent::Kind::SpawnObstacle, true, true, false}},
      {"remove_obstacle", {ScenarioEvent::Kind::RemoveObstacle, true, false, false}},
      {"press_override", {ScenarioEvent::Kind::PressOverride, false, false, true}},
      {"release_override", {ScenarioEvent::Kind::ReleaseOverride, false, false, false}},
  };
  auto it = specs.find(kind);
  return it == specs.end() ? nullptr : &it->second;
}

ScenarioEvent parse_event(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  if (!j.contains("kind") || !j["kind"].is_string()) fail(path, "missing string 'kind'");

  const std::string kind_name = j["kind"].get<std::string>();
  const EventSpec* spec = event_spec(kind_name);
  if (!spec) fail(path + ".kind", "unknown event kind '" + kind_name + "'");

  ScenarioEvent ev;
  ev.kind = spec->kind;
  ev.t_s = require_number(j, path, "t");
  if (ev.t_s < 0.0) fail(path + ".t", "must be >= 0");

  std::set<std::string> allowed = {"t", "kind"};
  if (spec->has_id) {
    ev.id = require_int(j, path, "id");
    allowed.insert("id");
  }
  if (spec->has_pose) {
    ev.dist_m = require_number(j, path, "dist_m");
    if (ev.dist_m <= 0.0) fail(path + ".dist_m", "must be > 0");
    ev.bearing_rad = require_number(j, path, "bearing_rad");
    if (std::abs(ev.bearing_rad) > std::numbers::pi) {
      fail(path + ".bearing_rad", "must be in [-pi, pi]");
    }
    allowed.insert("dist_m");
    allowed.insert("bearing_rad");
  }
  if (spec->has_preset) {
    if (!j.contains("preset") || !j["preset"].is_string()) {
      fail(path, "missing string 'preset'");
    }
    ev.preset = parse_preset(j["preset"].get<std::string>(), path + ".preset");
    allowed.insert("preset");
  }

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path, "unknown key '" + key + "'");
  }
  return ev;
}

// Replays spawn/remove to reject dead or duplicate entity ids.
void check_liveness(const std::vector<ScenarioEvent>& events) {
  std::set<int> live;  // ids are unique across persons and obstacles
  for (std::size_t i = 0; i < events.size(); ++i) {
    const ScenarioEvent& ev = events[i];
    const std::string path = "events[" + std::to_string(i) + "]";
    switch (ev.kind) {
      case ScenarioEvent::Kind::SpawnPerson:
      case ScenarioEvent::Kind::SpawnObstacle:
        if (!live.insert(ev.id).second) {
          fail(path, "id " + std::to_string(ev.id) + " is already live");
        }
        break;
      case ScenarioEvent::Kind::MovePerson:
        if (!live.count(ev.id)) fail(path, "id " + std::to_string(ev.id) + " is not live");
        break;
      case ScenarioEvent::Kind::RemovePerson:
      case ScenarioEvent::Kind::RemoveObstacle:
        if (!live.erase(ev.id)) fail(path, "id " + std::to_string(ev.id) + " is not live");
        break;
      case ScenarioEvent::Kind::PressOverride:
      case ScenarioEvent::Kind::ReleaseOverride:
        break;
    }
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    // Re-parse with exceptions to surface the position-annotated error.
    try {
      j = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ScenarioError(std::string("scenario: ") + e.what());
    }
  }
  if (!j.is_object()) fail("$", "top level must be an object");

  Scenario sc;
  if (!j.contains("meta") || !j["meta"].is_object()) fail("meta", "required object");
  const json& meta = j["meta"];
  std::set<std::string> meta_allowed = {"duration_s", "tick_hz", "perception_hz", "seed"};
  for (const auto& [key, value] : meta.items()) {
    (void)value;
    if (!meta_allowed.count(key)) fail("meta", "unknown key '" + key + "'");
  }
  sc.meta.duration_s = require_number(meta, "meta", "duration_s");
  if (sc.meta.duration_s <= 0.0) fail("meta.duration_s", "must be > 0");
  if (meta.contains("tick_hz")) sc.meta.tick_hz = require_int(meta, "meta", "tick_hz");
  if (meta.contains("perception_hz")) {
    sc.meta.perception_hz = require_int(meta, "meta", "perception_hz");
  }
  if (sc.meta.tick_hz <= 0) fail("meta.tick_hz", "must be > 0");
  if (sc.meta.perception_hz <= 0) fail("meta.perception_hz", "must be > 0");
  if (sc.meta.tick_hz % sc.meta.perception_hz != 0) {
    fail("meta.perception_hz", "must divide tick_hz");
  }
  if (meta.contains("seed")) {
    if (!meta["seed"].is_number_unsigned()) fail("meta.seed", "must be a non-negative integer");
    sc.meta.seed = meta["seed"].get<std::uint64_t>();
  }

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "meta" && key != "events" && key != "config_overrides") {
      fail("$", "unknown key '" + key + "'");
    }
  }

  if (j.contains("events")) {
    if (!j["events"].is_array()) fail("events", "must be an array");
    double prev_t = 0.0;
    for (std::size_t i = 0; i < j["events"].size(); ++i) {
      const std::string path = "events[" + std::to_string(i) + "]";
      ScenarioEvent ev = parse_event(j["events"][i], path);
      if (ev.t_s > sc.meta.duration_s) fail(path + ".t", "exceeds duration_s");
      if (ev.t_s < prev_t) fail(path + ".t", "events must be sorted by t");
      prev_t = ev.t_s;
      sc.events.push_back(ev);
    }
  }

  if (j.contains("config_overrides")) {
    if (!j["config_overrides"].is_object()) fail("config_overrides", "must be an object");
    for (const auto& [key, value] : j["config_overrides"].items()) {
      if (!value.is_number()) fail("config_overrides." + key, "must be a number");
      sc.config_overrides[key] = value.get<double>();
    }
    // Reject unknown keys now rather than at run time.
    try {
      Config probe;
      apply_config_overrides(probe, sc.config_overrides);
    } catch (const ConfigError& e) {
      throw ScenarioError(std::string("scenario: config_overrides: ") + e.what());
    }
  }

  check_liveness(sc.events);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

}  // namespace sumbrella
