#include "sumbrella/behavior.hpp"

#include <cmath>

namespace sumbrella {

namespace {

Mode preset_mode(Preset p) {
  switch (p) {
    case Preset::Welcoming: return Mode::welcoming();
    case Preset::Withdrawal: return Mode::withdrawal();
    case Preset::Waving: return Mode::waving();
  }
  return Mode::neutral();
}

// The posture a mode drives toward; OverrideHeld borrows its preset's entry.
Mode posture_of(const Mode& mode) {
  return mode.kind == Mode::Kind::OverrideHeld ? preset_mode(mode.preset) : mode;
}

Mode target_mode(const Mode& current, const OverrideLatch& latch,
                 const std::optional<StablePerceptionSummary>& summary,
                 const BehaviorConfig& cfg) {
  if (latch.active) return Mode::override_held(latch.preset);
  if (!summary) {
    // No stable scene yet: hold, unless a released override left us pinned.
    return current.kind == Mode::Kind::OverrideHeld ? Mode::neutral() : current;
  }
  const PerceptionSummary& s = summary->summary;
  if (!s.obstacle_sectors.empty()) return Mode::avoidance(s.obstacle_sectors);
  if (s.persons_within >= cfg.multi_person_threshold) return Mode::withdrawal();
  if (s.persons_within == 1) return Mode::welcoming();
  return Mode::neutral();
}

bool pneumatic_phase_confirmed(const std::array<double, 3>& targets,
                               const SubsystemTelemetry& tlm, const BehaviorConfig& cfg) {
  if (!tlm.pneumatic) return false;
  for (int i = 0; i < kNumLeaves; ++i) {
    if (std::abs(tlm.pneumatic->pressure_kpa[size_t(i)] - targets[size_t(i)]) >
        cfg.pressure_confirm_band_kpa) {
      return false;
    }
  }
  return true;
}

bool cable_phase_confirmed(const CableCommand& cmd, const SubsystemTelemetry& tlm) {
  if (cmd.kind == CableCommand::Kind::Hold) return true;
  if (!tlm.cable) return false;
  for (int i = 0; i < kNumLeaves; ++i) {
    if (!cmd.leaves.contains(i)) continue;
    const LeafMode m = tlm.cable->mode[size_t(i)];
    switch (cmd.kind) {
      case CableCommand::Kind::PullUp:
        if (m != LeafMode::Settled) return false;
        break;
      case CableCommand::Kind::Release:
        // An unhomed leaf rejects Release but is already down; idle-at-zero counts.
        if (!((m == LeafMode::Settled || m == LeafMode::Idle) &&
              tlm.cable->position_ticks[size_t(i)] <= 0.5)) {
          return false;
        }
        break;
      case CableCommand::Kind::Wave:
        if (m != LeafMode::Waving) return false;
        break;
      case CableCommand::Kind::Hold:
        break;
    }
  }
  return true;
}

bool phase_confirmed(const CommandSet& phase, const SubsystemTelemetry& tlm,
                     const BehaviorConfig& cfg) {
  if (phase.pneumatic_targets_kpa &&
      !pneumatic_phase_confirmed(*phase.pneumatic_targets_kpa, tlm, cfg)) {
    return false;
  }
  if (phase.cable_command && !cable_phase_confirmed(*phase.cable_command, tlm)) {
    return false;
  }
  return true;
}

}  // namespace

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::Welcoming: return "Welcoming";
    case Preset::Withdrawal: return "Withdrawal";
    case Preset::Waving: return "Waving";
  }
  return "?";
}

OverrideLatch apply_override(OverrideLatch latch, const ButtonEvent& event) {
  if (event.kind == ButtonEvent::Kind::Press) {
    latch.active = true;
    latch.preset = event.preset;
  } else {
    latch.active = false;
  }
  return latch;
}

std::string Mode::to_string() const {
  switch (kind) {
    case Kind::Neutral: return "Neutral";
    case Kind::Welcoming: return "Welcoming";
    case Kind::Withdrawal: return "Withdrawal";
    case Kind::Waving: return "Waving";
    case Kind::Avoidance: return "Avoidance(" + lifted.to_string() + ")";
    case Kind::OverrideHeld: return std::string("OverrideHeld(") + preset_name(preset) + ")";
  }
  return "?";
}

std::vector<CommandSet> entry_sequence(const Mode& mode, const BehaviorConfig& cfg,
                                       const std::array<double, 3>& base_targets) {
  const Mode posture = posture_of(mode);
  const std::array<double, 3> deflated{0.0, 0.0, 0.0};
  const std::array<double, 3> inflated{cfg.p_inflate_kpa, cfg.p_inflate_kpa,
                                       cfg.p_inflate_kpa};
  WaveParams wave{cfg.wave.amplitude, cfg.wave.frequency_hz, cfg.wave.phase_rad};

  std::vector<CommandSet> seq;
  switch (posture.kind) {
    case Mode::Kind::Welcoming:
      seq.push_back(CommandSet{deflated, std::nullopt, CommandOrdering::PneumaticFirst});
      seq.push_back(CommandSet{std::nullopt, CableCommand::pull_up(LeafSet::all()),
                               CommandOrdering::PneumaticFirst});
      break;
    case Mode::Kind::Neutral:  // the resting posture is the inflated shroud
    case Mode::Kind::Withdrawal:
      seq.push_back(CommandSet{std::nullopt, CableCommand::release(LeafSet::all()),
                               CommandOrdering::CableFirst});
      seq.push_back(CommandSet{inflated, std::nullopt, CommandOrdering::CableFirst});
      break;
    case Mode::Kind::Waving:
      seq.push_back(CommandSet{deflated, std::nullopt, CommandOrdering::PneumaticFirst});
      seq.push_back(CommandSet{std::nullopt, CableCommand::waving(wave),
                               CommandOrdering::PneumaticFirst});
      break;
    case Mode::Kind::Avoidance: {
      std::array<double, 3> targets = base_targets;
      for (int i = 0; i < kNumLeaves; ++i) {
        if (posture.lifted.contains(i)) targets[size_t(i)] = 0.0;
      }
      seq.push_back(CommandSet{targets, std::nullopt, CommandOrdering::PneumaticFirst});
      seq.push_back(CommandSet{std::nullopt, CableCommand::pull_up(posture.lifted),
                               CommandOrdering::PneumaticFirst});
      break;
    }
    case Mode::Kind::OverrideHeld:
      break;  // unreachable, posture_of resolved it
  }
  return seq;
}

EntryPhase BehaviorState::entry_phase(const BehaviorConfig& cfg) const {
  const auto seq = entry_sequence(mode, cfg, commanded_targets_kpa);
  const int idx = phase_index == kEntryPending ? 0 : phase_index;
  if (idx >= int(seq.size())) return EntryPhase::Settled;
  return seq[size_t(idx)].pneumatic_targets_kpa ? EntryPhase::PneumaticPhase
                                                : EntryPhase::CablePhase;
}

StepResult step(const BehaviorState& state, const OverrideLatch& latch,
                const std::optional<StablePerceptionSummary>& summary,
                const SubsystemTelemetry& telemetry, const BehaviorConfig& cfg) {
  StepResult r;
  r.state = state;

  const Mode target = target_mode(state.mode, latch, summary, cfg);
  const bool entering =
      target != state.mode || state.phase_index == BehaviorState::kEntryPending;

  auto emit_phase = [&](const std::vector<CommandSet>& seq, int idx) {
    r.commands = seq[size_t(idx)];
    if (r.commands.pneumatic_targets_kpa) {
      r.state.commanded_targets_kpa = *r.commands.pneumatic_targets_kpa;
    }
  };

  if (entering) {
    r.state.mode = target;
    r.state.phase_index = 0;
    r.state.ticks_in_phase = 1;
    const auto seq = entry_sequence(target, cfg, r.state.commanded_targets_kpa);
    if (!seq.empty()) {
      emit_phase(seq, 0);
    } else {
      r.state.phase_index = 0;  // settled immediately
    }
    return r;
  }

  const auto seq = entry_sequence(state.mode, cfg, state.commanded_targets_kpa);
  if (state.phase_index >= int(seq.size())) {
    return r;  // settled; nothing to emit
  }

  r.state.ticks_in_phase = state.ticks_in_phase + 1;
  const bool confirmed = phase_confirmed(seq[size_t(state.phase_index)], telemetry, cfg);
  const bool timed_out = double(r.state.ticks_in_phase) * cfg.tick_dt_s >= cfg.phase_timeout_s;
  if (!confirmed && !timed_out) {
    return r;
  }

  r.phase_timed_out = !confirmed;
  r.state.phase_index = state.phase_index + 1;
  r.state.ticks_in_phase = 1;
  if (r.state.phase_index < int(seq.size())) {
    emit_phase(seq, r.state.phase_index);
  }
  return r;
}

}  // namespace sumbrella
