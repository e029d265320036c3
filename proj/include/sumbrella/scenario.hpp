#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sumbrella/behavior.hpp"

namespace sumbrella {

struct ScenarioMeta {
  int tick_hz = 50;
  int perception_hz = 10;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
};

struct ScenarioEvent {
  enum class Kind : std::uint8_t {
    SpawnPerson,
    MovePerson,
    RemovePerson,
    SpawnObstacle,
    RemoveObstacle,
    PressOverride,
    ReleaseOverride,
  };

  double t_s = 0.0;
  Kind kind = Kind::SpawnPerson;
  int id = 0;                          // entity events
  double dist_m = 0.0;                 // spawn/move
  double bearing_rad = 0.0;            // spawn/move
  Preset preset = Preset::Welcoming;   // press_override
};

struct Scenario {
  ScenarioMeta meta;
  std::vector<ScenarioEvent> events;  // sorted by t_s
  std::map<std::string, double> config_overrides;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses and fully validates a scenario document. Unknown keys, unsorted
// events, out-of-range times, unknown presets and dead/duplicate entity ids
// are all rejected with a path-annotated message.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

}  // namespace sumbrella
