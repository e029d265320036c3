#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sumbrella/cable.hpp"
#include "sumbrella/config.hpp"
#include "sumbrella/leaf.hpp"
#include "sumbrella/perception.hpp"
#include "sumbrella/plant.hpp"

namespace sumbrella {

enum class Preset : std::uint8_t { Welcoming = 0, Withdrawal = 1, Waving = 2 };

const char* preset_name(Preset p);

struct OverrideLatch {
  bool active = false;
  Preset preset = Preset::Welcoming;  // meaningful only while active
  bool operator==(const OverrideLatch&) const = default;
};

struct ButtonEvent {
  enum class Kind : std::uint8_t { Press, Release };
  Kind kind = Kind::Release;
  Preset preset = Preset::Welcoming;  // Press only

  static ButtonEvent press(Preset p) { return {Kind::Press, p}; }
  static ButtonEvent release() { return {Kind::Release, Preset::Welcoming}; }
};

// Press latches the preset, Release clears it. Idempotent.
OverrideLatch apply_override(OverrideLatch latch, const ButtonEvent& event);

struct Mode {
  enum class Kind : std::uint8_t {
    Neutral,
    Welcoming,
    Withdrawal,
    Waving,
    Avoidance,
    OverrideHeld,
  };
  Kind kind = Kind::Neutral;
  LeafSet lifted;                     // Avoidance only, nonempty
  Preset preset = Preset::Welcoming;  // OverrideHeld only

  static Mode neutral() { return {}; }
  static Mode welcoming() { return {Kind::Welcoming, {}, {}}; }
  static Mode withdrawal() { return {Kind::Withdrawal, {}, {}}; }
  static Mode waving() { return {Kind::Waving, {}, {}}; }
  static Mode avoidance(LeafSet lifted) { return {Kind::Avoidance, lifted, {}}; }
  static Mode override_held(Preset p) { return {Kind::OverrideHeld, {}, p}; }

  bool operator==(const Mode&) const = default;
  std::string to_string() const;  // "Avoidance(1)", "OverrideHeld(Waving)", ...
};

enum class CommandOrdering : std::uint8_t { PneumaticFirst, CableFirst, Simultaneous };

struct CommandSet {
  std::optional<std::array<double, 3>> pneumatic_targets_kpa;
  std::optional<CableCommand> cable_command;
  CommandOrdering ordering = CommandOrdering::Simultaneous;

  bool empty() const { return !pneumatic_targets_kpa && !cable_command; }
  bool operator==(const CommandSet&) const = default;
};

enum class EntryPhase : std::uint8_t { PneumaticPhase, CablePhase, Settled };

struct BehaviorState {
  static constexpr int kEntryPending = -1;

  Mode mode;
  int phase_index = kEntryPending;  // index into entry_sequence; past-the-end = settled
  int ticks_in_phase = 0;
  std::array<double, 3> commanded_targets_kpa{};  // last pneumatic targets issued

  EntryPhase entry_phase(const BehaviorConfig& cfg) const;
  bool operator==(const BehaviorState&) const = default;
};

// Telemetry as decoded from the two subsystem links.
struct CableTelemetry {
  std::array<LeafMode, 3> mode{LeafMode::Idle, LeafMode::Idle, LeafMode::Idle};
  std::array<double, 3> position_ticks{};
  std::array<double, 3> torque{};
};

struct PneuTelemetry {
  std::array<double, 3> pressure_kpa{};
  std::array<ValveRoute, 3> route{ValveRoute::Hold, ValveRoute::Hold, ValveRoute::Hold};
  std::array<double, 3> duty{};
};

struct SubsystemTelemetry {
  std::optional<CableTelemetry> cable;
  std::optional<PneuTelemetry> pneumatic;
};

// Ordered command phases issued on entry into a mode. base_targets supplies
// the pressure levels for leaves an Avoidance entry leaves untouched.
//
//   Welcoming   : deflate all, then pull all leaves up        (pneumatic first)
//   Withdrawal  : release all, then inflate all to p_inflate  (cable first)
//   Neutral     : same as Withdrawal (the resting posture is the inflated shroud)
//   Waving      : deflate all, then wave with default params
//   Avoidance(S): deflate leaves in S, then pull up leaves in S only
std::vector<CommandSet> entry_sequence(const Mode& mode, const BehaviorConfig& cfg,
                                       const std::array<double, 3>& base_targets = {});

struct StepResult {
  BehaviorState state;
  CommandSet commands;
  bool phase_timed_out = false;  // sequencer advanced on timeout this tick
};

// One control tick of the central state machine. Pure function of its inputs.
//
// Transition policy: an active override pins the mode to its preset; otherwise
// any obstacle sector triggers Avoidance over those sectors; otherwise
// multi_person_threshold or more people in range trigger Withdrawal; exactly
// one triggers Welcoming; an empty scene is Neutral. The summary must already
// be debounce-stable; while none is available the engine holds.
//
// On a mode change the entry sequence restarts; each phase's commands are
// emitted once, and the sequencer advances when telemetry confirms the phase
// (pressures within the confirm band, or addressed leaves settled/waving) or
// after phase_timeout_s, whichever comes first.
StepResult step(const BehaviorState& state, const OverrideLatch& latch,
                const std::optional<StablePerceptionSummary>& summary,
                const SubsystemTelemetry& telemetry, const BehaviorConfig& cfg);

}  // namespace sumbrella
