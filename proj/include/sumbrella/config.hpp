#pragma once

#include <array>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sumbrella {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PerceptionConfig {
  double c_min = 0.5;              // detector confidence threshold
  double r_social_m = 2.5;         // person-counting radius
  double r_avoid_m = 0.6;          // personal-space radius for obstacle sectors
  int debounce_frames = 5;         // same-bucket frames before a summary is stable
  double synth_confidence = 0.95;  // confidence of synthesized detections
  double dropout_prob = 0.02;      // per-entity per-frame detector dropout
};

struct WaveDefaults {
  double amplitude = 1.0;
  double frequency_hz = 0.5;
  std::array<double, 3> phase_rad = {0.0, 2.0 * std::numbers::pi / 3.0,
                                     4.0 * std::numbers::pi / 3.0};
};

struct BehaviorConfig {
  int multi_person_threshold = 2;
  double p_inflate_kpa = 25.0;  // withdrawal inflation target, above the pop threshold
  double phase_timeout_s = 3.0;
  double pressure_confirm_band_kpa = 1.0;
  double tick_dt_s = 0.02;  // control period; the harness keeps this equal to 1/tick_hz
  WaveDefaults wave;
};

struct CableConfig {
  double torque_threshold = 120.0;
  double wind_rate_ticks_per_s = 800.0;
  double kp_per_s = 5.0;
  double v_max_ticks_per_s = 2000.0;
  double f_max_hz = 2.0;
};

struct PneumaticsConfig {
  double kp = 0.16;  // duty per kPa
  double ki = 0.15;  // duty per (kPa*s)
  double kd = 0.0;
  double deadband_kpa = 0.05;
  double i_max_kpa_s = 25.0;
  double p_max_kpa = 40.0;
};

struct PlantConfig {
  double alpha_kpa_per_s = 20.0;  // inflation pump flow at duty 1
  double beta_kpa_per_s = 40.0;   // shared exhaust pump flow at duty 1
  double leak_per_s = 0.05;
  double p_burst_kpa = 60.0;
  double p_pop_kpa = 18.0;
  double p_unpop_kpa = 8.0;
  double x_stall_ticks = 1000.0;
  double x_stall_jitter_ticks = 0.0;
  double torque_base = 60.0;
  double torque_wall = 200.0;
  double wall_width_ticks = 50.0;
  double winch_v_max_ticks_per_s = 2000.0;
  double curl_max_rad = 2.6;
  double curl_min_rad = 0.5;
  double elev_soft_rad = 0.3;
  double elev_max_rad = 1.4;
};

struct Config {
  BehaviorConfig behavior;
  PerceptionConfig perception;
  CableConfig cable;
  PneumaticsConfig pneumatics;
  PlantConfig plant;
};

// Loads a JSON config file with sections {behavior, perception, cable,
// pneumatics, plant}. Missing sections/keys keep their defaults; unknown
// keys are rejected.
Config load_config_file(const std::string& path);
Config parse_config(const std::string& json_text);

// Applies one "section.key" override onto an existing config.
void apply_config_override(Config& cfg, const std::string& dotted_key, double value);
void apply_config_overrides(Config& cfg, const std::map<std::string, double>& overrides);

}  // namespace sumbrella
