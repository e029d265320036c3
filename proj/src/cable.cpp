#include "sumbrella/cable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sumbrella {

double wave_setpoint(double t_s, const WaveParams& params, double recorded_displacement,
                     int leaf) {
  const double half = recorded_displacement / 2.0;
  const double phase =
      2.0 * std::numbers::pi * params.frequency_hz * t_s + params.phase_rad[size_t(leaf)];
  const double sp = half + half * params.amplitude * std::sin(phase);
  return std::clamp(sp, 0.0, recorded_displacement);
}

double track(double setpoint, double position, const CableConfig& cfg) {
  return std::clamp(cfg.kp_per_s * (setpoint - position), -cfg.v_max_ticks_per_s,
                    cfg.v_max_ticks_per_s);
}

CableStepResult cable_step(CableState state, const std::optional<CableCommand>& command,
                           const std::array<double, 3>& measured_torque, double dt,
                           const CableConfig& cfg) {
  CableStepResult r;
  r.rejected_leaves = 0;

  if (command) {
    switch (command->kind) {
      case CableCommand::Kind::Hold:
        for (auto& m : state.mode) m = LeafMode::Idle;
        state.wave_pending = {false, false, false};
        break;
      case CableCommand::Kind::PullUp:
        for (int i = 0; i < kNumLeaves; ++i) {
          if (!command->leaves.contains(i)) continue;
          state.mode[size_t(i)] = LeafMode::Winding;
          state.wave_pending[size_t(i)] = false;
        }
        break;
      case CableCommand::Kind::Release:
        for (int i = 0; i < kNumLeaves; ++i) {
          if (!command->leaves.contains(i)) continue;
          if (!state.recorded_displacement[size_t(i)]) {
            ++r.rejected_leaves;  // no recorded pull-up displacement to unwind against
            continue;
          }
          state.mode[size_t(i)] = LeafMode::Unwinding;
          state.wave_pending[size_t(i)] = false;
        }
        break;
      case CableCommand::Kind::Wave: {
        state.wave = command->wave;
        state.wave.amplitude = std::clamp(state.wave.amplitude, 0.0, 1.0);
        state.wave.frequency_hz = std::clamp(state.wave.frequency_hz, 0.0, cfg.f_max_hz);
        state.wave_clock_s = 0.0;
        for (int i = 0; i < kNumLeaves; ++i) {
          if (!command->leaves.contains(i)) continue;
          if (state.recorded_displacement[size_t(i)]) {
            state.mode[size_t(i)] = LeafMode::Waving;
          } else {
            state.mode[size_t(i)] = LeafMode::Winding;  // implicit pull-up homes first
            state.wave_pending[size_t(i)] = true;
          }
        }
        break;
      }
    }
  }

  for (int i = 0; i < kNumLeaves; ++i) {
    const auto s = size_t(i);
    double v = 0.0;
    switch (state.mode[s]) {
      case LeafMode::Idle:
      case LeafMode::Settled:
        break;
      case LeafMode::Winding:
        if (measured_torque[s] >= cfg.torque_threshold) {
          state.recorded_displacement[s] = state.position_ticks[s];
          state.mode[s] = state.wave_pending[s] ? LeafMode::Waving : LeafMode::Settled;
          state.wave_pending[s] = false;
        } else {
          v = cfg.wind_rate_ticks_per_s;
          state.position_ticks[s] += v * dt;
        }
        break;
      case LeafMode::Unwinding:
        if (state.position_ticks[s] <= cfg.wind_rate_ticks_per_s * dt) {
          v = -state.position_ticks[s] / dt;  // final partial step lands on exactly 0
          state.position_ticks[s] = 0.0;
          state.mode[s] = LeafMode::Settled;
        } else {
          v = -cfg.wind_rate_ticks_per_s;
          state.position_ticks[s] += v * dt;
        }
        break;
      case LeafMode::Waving: {
        const double sp =
            wave_setpoint(state.wave_clock_s, state.wave, *state.recorded_displacement[s], i);
        state.last_setpoint[s] = sp;
        v = track(sp, state.position_ticks[s], cfg);
        state.position_ticks[s] = std::max(0.0, state.position_ticks[s] + v * dt);
        break;
      }
    }
    r.output.velocity_ticks_per_s[s] = v;
  }

  state.wave_clock_s += dt;
  r.state = std::move(state);
  return r;
}

}  // namespace sumbrella
