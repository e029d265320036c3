#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "sumbrella/config.hpp"
#include "sumbrella/leaf.hpp"

namespace sumbrella {

// Telemetry/state codes match the wire encoding of TlmCableStatus.
enum class LeafMode : std::uint8_t {
  Idle = 0,
  Winding = 1,
  Unwinding = 2,
  Waving = 3,
  Settled = 4,
};

struct WaveParams {
  double amplitude = 1.0;     // fraction of recorded displacement, [0, 1]
  double frequency_hz = 0.5;  // (0, f_max]
  std::array<double, 3> phase_rad{};
  bool operator==(const WaveParams&) const = default;
};

struct CableCommand {
  enum class Kind : std::uint8_t { Hold, PullUp, Release, Wave };
  Kind kind = Kind::Hold;
  LeafSet leaves;  // PullUp/Release/Wave; Hold always applies to all leaves
  WaveParams wave;

  static CableCommand hold() { return {Kind::Hold, LeafSet::all(), {}}; }
  static CableCommand pull_up(LeafSet s) { return {Kind::PullUp, s, {}}; }
  static CableCommand release(LeafSet s) { return {Kind::Release, s, {}}; }
  static CableCommand waving(const WaveParams& p, LeafSet s = LeafSet::all()) {
    return {Kind::Wave, s, p};
  }
  bool operator==(const CableCommand&) const = default;
};

struct CableState {
  std::array<LeafMode, 3> mode{LeafMode::Idle, LeafMode::Idle, LeafMode::Idle};
  std::array<double, 3> position_ticks{};
  std::array<std::optional<double>, 3> recorded_displacement{};
  std::array<bool, 3> wave_pending{};  // unhomed leaf waiting on its implicit pull-up
  WaveParams wave;
  std::array<double, 3> last_setpoint{};
  double wave_clock_s = 0.0;
};

struct MotorOutput {
  std::array<double, 3> velocity_ticks_per_s{};
};

struct CableStepResult {
  CableState state;
  MotorOutput output;
  int rejected_leaves = 0;  // Release addressed to unhomed leaves
};

// Sine setpoint centered at half the recorded displacement:
//   D/2 + (D/2) * amplitude * sin(2*pi*f*t + phase[leaf]), clamped to [0, D].
double wave_setpoint(double t_s, const WaveParams& params, double recorded_displacement,
                     int leaf);

// Proportional velocity command, clamped to +/- v_max.
double track(double setpoint, double position, const CableConfig& cfg);

// One step of the devolved cable-drive state machine. Winding leaves advance
// at wind_rate until measured torque crosses the threshold, which records the
// displacement; Unwinding leaves retreat to exactly 0; Waving leaves track the
// sine setpoint. Commands only touch the leaves they address. A Wave on an
// unhomed leaf pulls up first and starts waving once homed.
CableStepResult cable_step(CableState state, const std::optional<CableCommand>& command,
                           const std::array<double, 3>& measured_torque, double dt,
                           const CableConfig& cfg);

}  // namespace sumbrella
