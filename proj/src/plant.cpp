#include "sumbrella/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sumbrella/leaf.hpp"
#include "sumbrella/rng.hpp"

namespace sumbrella {

PlantFault::PlantFault(int leaf_, double pressure_kpa_)
    : std::runtime_error("chamber " + std::to_string(leaf_) + " burst at " +
                         std::to_string(pressure_kpa_) + " kPa"),
      leaf(leaf_),
      pressure_kpa(pressure_kpa_) {}

bool pop_state(double pressure_kpa, bool popped, const PlantConfig& cfg) {
  if (!popped && pressure_kpa > cfg.p_pop_kpa) return true;
  if (popped && pressure_kpa <= cfg.p_unpop_kpa) return false;
  return popped;
}

ChamberState chamber_step(ChamberState state, double inflate_duty, double exhaust_duty,
                          ValveRoute route, double dt, const PlantConfig& cfg, int leaf) {
  double flow = 0.0;
  if (route == ValveRoute::Inflate) {
    flow += cfg.alpha_kpa_per_s * inflate_duty;
  } else if (route == ValveRoute::Exhaust) {
    flow -= cfg.beta_kpa_per_s * exhaust_duty;
  }
  flow -= cfg.leak_per_s * state.pressure_kpa;
  state.pressure_kpa += dt * flow;
  if (state.pressure_kpa < 0.0) state.pressure_kpa = 0.0;
  if (state.pressure_kpa > cfg.p_burst_kpa) throw PlantFault(leaf, state.pressure_kpa);
  state.popped = pop_state(state.pressure_kpa, state.popped, cfg);
  return state;
}

WinchStepResult winch_step(double position_ticks, double velocity_cmd, double dt,
                           double x_stall, const PlantConfig& cfg) {
  const double v = std::clamp(velocity_cmd, -cfg.winch_v_max_ticks_per_s,
                              cfg.winch_v_max_ticks_per_s);
  double x = std::clamp(position_ticks + v * dt, 0.0, x_stall);
  const double w = cfg.wall_width_ticks;
  const double torque =
      cfg.torque_base * (x / x_stall) + cfg.torque_wall * std::max(0.0, x - x_stall + w) / w;
  return {x, torque};
}

LeafPose leaf_pose(double x_norm, bool popped, const PlantConfig& cfg) {
  if (popped) {
    return {cfg.curl_min_rad * x_norm, cfg.elev_max_rad * x_norm};
  }
  return {cfg.curl_max_rad * x_norm, cfg.elev_soft_rad * x_norm};
}

Plant::Plant(const PlantConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  Rng rng(seed);
  for (int i = 0; i < kNumLeaves; ++i) {
    const double jitter = cfg_.x_stall_jitter_ticks * (2.0 * rng.next_double() - 1.0);
    x_stall_[size_t(i)] = std::max(1.0, cfg_.x_stall_ticks + jitter);
  }
}

void Plant::step(const Inputs& in, double dt) {
  for (int i = 0; i < kNumLeaves; ++i) {
    const auto s = size_t(i);
    chambers_[s] = chamber_step(chambers_[s], in.inflate_duty[s], in.exhaust_duty,
                                in.route[s], dt, cfg_, i);
    const auto w = winch_step(position_[s], in.winch_velocity[s], dt, x_stall_[s], cfg_);
    position_[s] = w.position_ticks;
    torque_[s] = w.torque;
  }
}

}  // namespace sumbrella
