#include "sumbrella/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace sumbrella {

namespace {

struct KeyBinding {
  std::string key;  // "section.name"
  std::function<void(Config&, double)> set;
  bool integral = false;
};

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = [] {
    std::vector<KeyBinding> t;
    auto add = [&t](const char* key, auto member_ptr, auto section_ptr, bool integral = false) {
      t.push_back({key,
                   [member_ptr, section_ptr](Config& c, double v) {
                     auto& section = c.*section_ptr;
                     using T = std::remove_reference_t<decltype(section.*member_ptr)>;
                     section.*member_ptr = T(v);
                   },
                   integral});
    };

    add("behavior.multi_person_threshold", &BehaviorConfig::multi_person_threshold,
        &Config::behavior, true);
    add("behavior.p_inflate_kpa", &BehaviorConfig::p_inflate_kpa, &Config::behavior);
    add("behavior.phase_timeout_s", &BehaviorConfig::phase_timeout_s, &Config::behavior);
    add("behavior.pressure_confirm_band_kpa", &BehaviorConfig::pressure_confirm_band_kpa,
        &Config::behavior);
    add("behavior.tick_dt_s", &BehaviorConfig::tick_dt_s, &Config::behavior);
    t.push_back({"behavior.wave_amplitude",
                 [](Config& c, double v) { c.behavior.wave.amplitude = v; }});
    t.push_back({"behavior.wave_frequency_hz",
                 [](Config& c, double v) { c.behavior.wave.frequency_hz = v; }});

    add("perception.c_min", &PerceptionConfig::c_min, &Config::perception);
    add("perception.r_social_m", &PerceptionConfig::r_social_m, &Config::perception);
    add("perception.r_avoid_m", &PerceptionConfig::r_avoid_m, &Config::perception);
    add("perception.debounce_frames", &PerceptionConfig::debounce_frames, &Config::perception,
        true);
    add("perception.synth_confidence", &PerceptionConfig::synth_confidence,
        &Config::perception);
    add("perception.dropout_prob", &PerceptionConfig::dropout_prob, &Config::perception);

    add("cable.torque_threshold", &CableConfig::torque_threshold, &Config::cable);
    add("cable.wind_rate_ticks_per_s", &CableConfig::wind_rate_ticks_per_s, &Config::cable);
    add("cable.kp_per_s", &CableConfig::kp_per_s, &Config::cable);
    add("cable.v_max_ticks_per_s", &CableConfig::v_max_ticks_per_s, &Config::cable);
    add("cable.f_max_hz", &CableConfig::f_max_hz, &Config::cable);

    add("pneumatics.kp", &PneumaticsConfig::kp, &Config::pneumatics);
    add("pneumatics.ki", &PneumaticsConfig::ki, &Config::pneumatics);
    add("pneumatics.kd", &PneumaticsConfig::kd, &Config::pneumatics);
    add("pneumatics.deadband_kpa", &PneumaticsConfig::deadband_kpa, &Config::pneumatics);
    add("pneumatics.i_max_kpa_s", &PneumaticsConfig::i_max_kpa_s, &Config::pneumatics);
    add("pneumatics.p_max_kpa", &PneumaticsConfig::p_max_kpa, &Config::pneumatics);

    add("plant.alpha_kpa_per_s", &PlantConfig::alpha_kpa_per_s, &Config::plant);
    add("plant.beta_kpa_per_s", &PlantConfig::beta_kpa_per_s, &Config::plant);
    add("plant.leak_per_s", &PlantConfig::leak_per_s, &Config::plant);
    add("plant.p_burst_kpa", &PlantConfig::p_burst_kpa, &Config::plant);
    add("plant.p_pop_kpa", &PlantConfig::p_pop_kpa, &Config::plant);
    add("plant.p_unpop_kpa", &PlantConfig::p_unpop_kpa, &Config::plant);
    add("plant.x_stall_ticks", &PlantConfig::x_stall_ticks, &Config::plant);
    add("plant.x_stall_jitter_ticks", &PlantConfig::x_stall_jitter_ticks, &Config::plant);
    add("plant.torque_base", &PlantConfig::torque_base, &Config::plant);
    add("plant.torque_wall", &PlantConfig::torque_wall, &Config::plant);
    add("plant.wall_width_ticks", &PlantConfig::wall_width_ticks, &Config::plant);
    add("plant.winch_v_max_ticks_per_s", &PlantConfig::winch_v_max_ticks_per_s,
        &Config::plant);
    add("plant.curl_max_rad", &PlantConfig::curl_max_rad, &Config::plant);
    add("plant.curl_min_rad", &PlantConfig::curl_min_rad, &Config::plant);
    add("plant.elev_soft_rad", &PlantConfig::elev_soft_rad, &Config::plant);
    add("plant.elev_max_rad", &PlantConfig::elev_max_rad, &Config::plant);
    return t;
  }();
  return table;
}

const KeyBinding* find_binding(const std::string& key) {
  for (const auto& b : bindings()) {
    if (b.key == key) return &b;
  }
  return nullptr;
}

}  // namespace

void apply_config_override(Config& cfg, const std::string& dotted_key, double value) {
  const KeyBinding* b = find_binding(dotted_key);
  if (!b) throw ConfigError("unknown config key: " + dotted_key);
  if (!std::isfinite(value)) throw ConfigError("non-finite value for " + dotted_key);
  if (b->integral && value != std::floor(value)) {
    throw ConfigError("integer value required for " + dotted_key);
  }
  b->set(cfg, value);
}

void apply_config_overrides(Config& cfg, const std::map<std::string, double>& overrides) {
  for (const auto& [key, value] : overrides) apply_config_override(cfg, key, value);
}

Config parse_config(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON");
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  Config cfg;
  static const char* sections[] = {"behavior", "perception", "cable", "pneumatics", "plant"};
  for (const auto& [section, body] : j.items()) {
    bool known = false;
    for (const char* s : sections) known = known || section == s;
    if (!known) throw ConfigError("config: unknown section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config: section '" + section + "' must be an object");

    for (const auto& [key, value] : body.items()) {
      const std::string dotted = section + "." + key;
      if (dotted == "behavior.wave_phase_rad") {
        if (!value.is_array() || value.size() != 3) {
          throw ConfigError("config: behavior.wave_phase_rad must be an array of 3 numbers");
        }
        for (int i = 0; i < 3; ++i) {
          if (!value[size_t(i)].is_number()) {
            throw ConfigError("config: behavior.wave_phase_rad must be numeric");
          }
          cfg.behavior.wave.phase_rad[size_t(i)] = value[size_t(i)].get<double>();
        }
        continue;
      }
      if (!value.is_number()) throw ConfigError("config: " + dotted + " must be a number");
      apply_config_override(cfg, dotted, value.get<double>());
    }
  }
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace sumbrella
