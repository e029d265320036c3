#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sumbrella/config.hpp"
#include "sumbrella/perception.hpp"
#include "sumbrella/scenario.hpp"
#include "sumbrella/trace.hpp"
#include "sumbrella/wire.hpp"

namespace sumbrella {

class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(std::int64_t tick, const std::string& what);
  std::int64_t tick;
};

struct RunOptions {
  // Debug switch: skip the byte-level encode/decode hop and hand the wire
  // message structs across directly. Field quantization still applies, so the
  // trace must be identical either way.
  bool bypass_codec = false;
};

struct RunResult {
  std::vector<TraceRow> trace;
  // Every command message the central computer emitted, with its frame bytes
  // (empty when the codec is bypassed).
  std::vector<std::pair<wire::Message, std::vector<std::uint8_t>>> command_log;
  std::uint64_t decode_errors = 0;
  std::uint64_t dropped_detections = 0;
};

// Executes duration_s * tick_hz deterministic control ticks: events, synthetic
// perception at perception_hz, the behavior engine, both subsystem controllers
// behind the wire protocol, and the plant. Scenario config_overrides are
// applied on top of the supplied config.
RunResult run(const Scenario& scenario, const Config& config, const RunOptions& opts = {});

// Same loop, but perception comes from a recorded detection log instead of
// scenario entities. Runs until one second past the last frame.
RunResult replay(const DetectionLog& log, const Config& config, const ScenarioMeta& meta,
                 const RunOptions& opts = {});

struct FuzzReport {
  std::uint64_t round_trips = 0;
  std::uint64_t failures = 0;
  std::uint64_t resync_trials = 0;
  std::uint64_t undetected_corruptions = 0;
  std::uint64_t seed = 0;
  std::string first_failure;  // message index + seed, for exact reproduction
};

// Round-trips n seed-derived messages through encode/decode under random
// fragmentation, then flips one random bit in each frame's length/type/
// payload/crc region and checks the corruption is never silently accepted.
FuzzReport fuzz_protocol(std::uint64_t n, std::uint64_t seed);

struct StepReport {
  double rise_time_s = 0.0;        // 10% -> 90%
  double overshoot_pct = 0.0;
  double settling_time_s = 0.0;    // last excursion outside the +/-2% band
  double steady_state_error_kpa = 0.0;
};

// Simulates one chamber from 0 kPa under the pneumatic controller for 10 s
// and reports step-response metrics.
StepReport pid_step_report(double target_kpa, const Config& config);

}  // namespace sumbrella
