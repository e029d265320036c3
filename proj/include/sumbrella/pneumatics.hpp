#pragma once

#include <array>

#include "sumbrella/config.hpp"
#include "sumbrella/plant.hpp"

namespace sumbrella {

struct PidState {
  double integrator = 0.0;      // kPa*s, clamped to +/- i_max
  double previous_error = 0.0;  // kPa
};

struct PidResult {
  double duty = 0.0;  // [0, 1]
  PidState state;
};

// Tri-state valve: Inflate when the target exceeds the measurement by more
// than the deadband, Exhaust in the opposite case, Hold in between.
ValveRoute valve_logic(double target_kpa, double measured_kpa, double deadband_kpa);

// One PID update. The integrator accumulates error*dt only while the
// unclamped output is inside [0, 1] (conditional anti-windup).
PidResult pid_update(PidState pid, double target_kpa, double measured_kpa, double dt,
                     const PneumaticsConfig& gains);

struct PneumaticTargets {
  std::array<double, 3> kpa{};
};

struct PneumaticTelemetry {
  std::array<double, 3> pressure_kpa{};
  std::array<ValveRoute, 3> route{ValveRoute::Hold, ValveRoute::Hold, ValveRoute::Hold};
  std::array<double, 3> pump_duty{};  // per-leaf inflation pump
  double exhaust_duty = 0.0;          // single shared exhaust pump
  bool targets_clamped = false;       // a commanded target fell outside [0, p_max]
};

struct PneumaticsState {
  std::array<PidState, 3> pid{};
  std::array<ValveRoute, 3> last_route{ValveRoute::Hold, ValveRoute::Hold,
                                       ValveRoute::Hold};
};

struct PneuStepResult {
  PneumaticsState state;
  std::array<ValveRoute, 3> route{};
  std::array<double, 3> duty{};
  double exhaust_duty = 0.0;
  PneumaticTelemetry telemetry;
};

// Per-leaf valve routing plus PID inflation duty. The shared exhaust pump
// runs at duty 1 whenever any leaf routes Exhaust. A leaf's integrator is
// reset when its route switches to or from Exhaust, so inflate windup never
// fights the exhaust path. Targets outside [0, p_max] are clamped and
// flagged in telemetry.
PneuStepResult pneu_step(const PneumaticsState& state, const PneumaticTargets& targets,
                         const std::array<double, 3>& measured_kpa, double dt,
                         const PneumaticsConfig& cfg);

}  // namespace sumbrella
