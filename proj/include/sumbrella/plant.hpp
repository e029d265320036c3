#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "sumbrella/config.hpp"

namespace sumbrella {

enum class ValveRoute : std::uint8_t { Hold = 0, Inflate = 1, Exhaust = 2 };

struct ChamberState {
  double pressure_kpa = 0.0;
  bool popped = false;
};

struct LeafPose {
  double curl_rad = 0.0;
  double elevation_rad = 0.0;
};

class PlantFault : public std::runtime_error {
 public:
  PlantFault(int leaf, double pressure_kpa);
  int leaf;
  double pressure_kpa;
};

// Bistable pop hysteresis: rising through p_pop sets the flag, falling to
// p_unpop or below clears it, anything in between retains it.
bool pop_state(double pressure_kpa, bool popped, const PlantConfig& cfg);

// One explicit-Euler step of dP/dt = alpha*u[Inflate] - beta*e[Exhaust] - leak*P,
// floored at 0. Throws PlantFault past the burst pressure.
ChamberState chamber_step(ChamberState state, double inflate_duty, double exhaust_duty,
                          ValveRoute route, double dt, const PlantConfig& cfg,
                          int leaf = 0);

struct WinchStepResult {
  double position_ticks;
  double torque;
};

// Integrates winch position (clamped to [0, x_stall]) and evaluates the load
// torque: a linear term over the travel plus a steep wall of width
// wall_width_ticks in front of the stall, so torque crosses the controller's
// threshold just below x_stall.
WinchStepResult winch_step(double position_ticks, double velocity_cmd, double dt,
                           double x_stall, const PlantConfig& cfg);

// Piecewise-linear pose map. Soft (unpopped) leaves curl hard and barely
// elevate; popped leaves elevate and barely curl.
LeafPose leaf_pose(double x_norm, bool popped, const PlantConfig& cfg);

// The simulated garment: three chambers with pop modules plus three winches.
// Stepped exclusively by the scenario engine.
class Plant {
 public:
  Plant(const PlantConfig& cfg, std::uint64_t seed);

  struct Inputs {
    std::array<ValveRoute, 3> route{ValveRoute::Hold, ValveRoute::Hold, ValveRoute::Hold};
    std::array<double, 3> inflate_duty{};
    double exhaust_duty = 0.0;
    std::array<double, 3> winch_velocity{};
  };

  void step(const Inputs& in, double dt);  // throws PlantFault

  double pressure_kpa(int leaf) const { return chambers_[size_t(leaf)].pressure_kpa; }
  bool popped(int leaf) const { return chambers_[size_t(leaf)].popped; }
  double winch_position(int leaf) const { return position_[size_t(leaf)]; }
  double torque(int leaf) const { return torque_[size_t(leaf)]; }
  double x_stall(int leaf) const { return x_stall_[size_t(leaf)]; }

 private:
  PlantConfig cfg_;
  std::array<ChamberState, 3> chambers_{};
  std::array<double, 3> position_{};
  std::array<double, 3> torque_{};
  std::array<double, 3> x_stall_{};
};

}  // namespace sumbrella
