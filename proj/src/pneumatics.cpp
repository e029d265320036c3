#include "sumbrella/pneumatics.hpp"

#include <algorithm>

#include "sumbrella/leaf.hpp"

namespace sumbrella {

ValveRoute valve_logic(double target_kpa, double measured_kpa, double deadband_kpa) {
  if (target_kpa - measured_kpa > deadband_kpa) return ValveRoute::Inflate;
  if (measured_kpa - target_kpa > deadband_kpa) return ValveRoute::Exhaust;
  return ValveRoute::Hold;
}

PidResult pid_update(PidState pid, double target_kpa, double measured_kpa, double dt,
                     const PneumaticsConfig& gains) {
  const double error = target_kpa - measured_kpa;
  const double derivative = (error - pid.previous_error) / dt;
  const double unclamped =
      gains.kp * error + gains.ki * pid.integrator + gains.kd * derivative;
  const double duty = std::clamp(unclamped, 0.0, 1.0);
  if (unclamped >= 0.0 && unclamped <= 1.0) {
    pid.integrator += error * dt;
    pid.integrator = std::clamp(pid.integrator, -gains.i_max_kpa_s, gains.i_max_kpa_s);
  }
  pid.previous_error = error;
  return {duty, pid};
}

PneuStepResult pneu_step(const PneumaticsState& state, const PneumaticTargets& targets,
                         const std::array<double, 3>& measured_kpa, double dt,
                         const PneumaticsConfig& cfg) {
  PneuStepResult r;
  r.state = state;

  bool any_exhaust = false;
  for (int i = 0; i < kNumLeaves; ++i) {
    const auto s = size_t(i);
    double target = targets.kpa[s];
    if (target < 0.0 || target > cfg.p_max_kpa) {
      target = std::clamp(target, 0.0, cfg.p_max_kpa);
      r.telemetry.targets_clamped = true;
    }

    const ValveRoute route = valve_logic(target, measured_kpa[s], cfg.deadband_kpa);
    if (route != r.state.last_route[s] &&
        (route == ValveRoute::Exhaust || r.state.last_route[s] == ValveRoute::Exhaust)) {
      r.state.pid[s].integrator = 0.0;  // inflate windup must not fight the exhaust path
    }
    r.state.last_route[s] = route;

    double duty = 0.0;
    if (route == ValveRoute::Inflate) {
      const PidResult pr = pid_update(r.state.pid[s], target, measured_kpa[s], dt, cfg);
      duty = pr.duty;
      r.state.pid[s] = pr.state;
    } else if (route == ValveRoute::Exhaust) {
      any_exhaust = true;
    }

    r.route[s] = route;
    r.duty[s] = duty;
    r.telemetry.pressure_kpa[s] = measured_kpa[s];
    r.telemetry.route[s] = route;
    r.telemetry.pump_duty[s] = duty;
  }

  r.exhaust_duty = any_exhaust ? 1.0 : 0.0;
  r.telemetry.exhaust_duty = r.exhaust_duty;
  return r;
}

}  // namespace sumbrella
