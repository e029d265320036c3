#include <doctest.h>

#include <optional>

#include "sumbrella/behavior.hpp"
#include "sumbrella/rng.hpp"

using namespace sumbrella;

namespace {

StablePerceptionSummary stable_persons(int n, double min_dist) {
  StablePerceptionSummary s;
  s.summary.persons_within = n;
  if (n > 0) s.summary.min_person_distance_m = min_dist;
  s.frames_stable = 5;
  return s;
}

StablePerceptionSummary stable_obstacle(LeafSet sectors) {
  StablePerceptionSummary s;
  s.summary.obstacle_sectors = sectors;
  s.frames_stable = 5;
  return s;
}

// Telemetry that confirms any phase: pressures at the given targets, all
// leaves settled at zero.
SubsystemTelemetry telemetry_at(const std::array<double, 3>& kpa,
                                LeafMode mode = LeafMode::Settled, double position = 0.0) {
  SubsystemTelemetry t;
  CableTelemetry c;
  c.mode = {mode, mode, mode};
  c.position_ticks = {position, position, position};
  t.cable = c;
  PneuTelemetry p;
  p.pressure_kpa = kpa;
  t.pneumatic = p;
  return t;
}

BehaviorState settled_in(const Mode& mode, const BehaviorConfig& cfg,
                         std::array<double, 3> targets = {}) {
  BehaviorState s;
  s.mode = mode;
  s.phase_index = int(entry_sequence(mode, cfg, targets).size());
  s.commanded_targets_kpa = targets;
  return s;
}

}  // namespace

TEST_CASE("apply_override latches and clears") {
  OverrideLatch latch;
  latch = apply_override(latch, ButtonEvent::press(Preset::Waving));
  CHECK(latch.active);
  CHECK(latch.preset == Preset::Waving);

  latch = apply_override(latch, ButtonEvent::press(Preset::Waving));  // idempotent
  CHECK(latch.active);
  CHECK(latch.preset == Preset::Waving);

  latch = apply_override(latch, ButtonEvent::release());
  CHECK(!latch.active);
  latch = apply_override(latch, ButtonEvent::release());
  CHECK(!latch.active);
}

TEST_CASE("transition policy") {
  BehaviorConfig cfg;
  const SubsystemTelemetry tlm;

  SUBCASE("one person in range means welcoming") {
    const auto r = step(settled_in(Mode::neutral(), cfg), {}, stable_persons(1, 1.8), tlm, cfg);
    CHECK(r.state.mode == Mode::welcoming());
  }
  SUBCASE("several people mean withdrawal") {
    const auto r = step(settled_in(Mode::neutral(), cfg), {}, stable_persons(3, 1.0), tlm, cfg);
    CHECK(r.state.mode == Mode::withdrawal());
  }
  SUBCASE("an active override pins the preset") {
    OverrideLatch latch{true, Preset::Withdrawal};
    const auto r = step(settled_in(Mode::welcoming(), cfg), latch, stable_persons(1, 1.0),
                        tlm, cfg);
    CHECK(r.state.mode == Mode::override_held(Preset::Withdrawal));
  }
  SUBCASE("empty scene holds neutral with no commands") {
    const auto r = step(settled_in(Mode::neutral(), cfg), {}, stable_persons(0, 0.0), tlm, cfg);
    CHECK(r.state.mode == Mode::neutral());
    CHECK(r.commands.empty());
  }
  SUBCASE("obstacle sectors trigger avoidance over those leaves") {
    const auto r = step(settled_in(Mode::neutral(), cfg), {}, stable_obstacle(LeafSet{2}),
                        tlm, cfg);
    CHECK(r.state.mode == Mode::avoidance(LeafSet{2}));
    CHECK(!r.state.mode.lifted.empty());
  }
  SUBCASE("avoidance outranks a crowd") {
    auto s = stable_persons(3, 0.5);
    s.summary.obstacle_sectors = LeafSet{0};
    const auto r = step(settled_in(Mode::neutral(), cfg), {}, s, tlm, cfg);
    CHECK(r.state.mode == Mode::avoidance(LeafSet{0}));
  }
  SUBCASE("without a stable summary the engine holds") {
    const auto r = step(settled_in(Mode::welcoming(), cfg), {}, std::nullopt, tlm, cfg);
    CHECK(r.state.mode == Mode::welcoming());
    CHECK(r.commands.empty());
  }
}

TEST_CASE("override supremacy over arbitrary summaries") {
  BehaviorConfig cfg;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    StablePerceptionSummary s;
    s.summary.persons_within = int(rng.next_below(5));
    if (s.summary.persons_within > 0) s.summary.min_person_distance_m = rng.next_double() * 3;
    s.summary.obstacle_sectors = LeafSet(std::uint8_t(rng.next_below(8)));
    s.frames_stable = 5;
    const Preset preset = Preset(rng.next_below(3));
    const OverrideLatch latch{true, preset};

    const auto r = step(settled_in(Mode::neutral(), cfg), latch, s, {}, cfg);
    CHECK(r.state.mode.kind == Mode::Kind::OverrideHeld);
    CHECK(r.state.mode.preset == preset);
  }
}

TEST_CASE("determinism: identical inputs give identical outputs") {
  BehaviorConfig cfg;
  const auto s = stable_persons(1, 1.2);
  const auto tlm = telemetry_at({25.0, 25.0, 25.0});
  const BehaviorState st = settled_in(Mode::neutral(), cfg, {25.0, 25.0, 25.0});
  const auto a = step(st, {}, s, tlm, cfg);
  const auto b = step(st, {}, s, tlm, cfg);
  CHECK(a.state == b.state);
  CHECK(a.commands == b.commands);
  CHECK(a.phase_timed_out == b.phase_timed_out);
}

TEST_CASE("entry sequences") {
  BehaviorConfig cfg;
  const std::array<double, 3> zero{0.0, 0.0, 0.0};
  const std::array<double, 3> inflated{25.0, 25.0, 25.0};

  SUBCASE("welcoming deflates, then pulls all leaves up") {
    const auto seq = entry_sequence(Mode::welcoming(), cfg);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].pneumatic_targets_kpa == zero);
    CHECK(!seq[0].cable_command.has_value());
    CHECK(seq[0].ordering == CommandOrdering::PneumaticFirst);
    REQUIRE(seq[1].cable_command.has_value());
    CHECK(seq[1].cable_command->kind == CableCommand::Kind::PullUp);
    CHECK(seq[1].cable_command->leaves == LeafSet::all());
  }
  SUBCASE("withdrawal releases, then inflates") {
    const auto seq = entry_sequence(Mode::withdrawal(), cfg);
    REQUIRE(seq.size() == 2);
    REQUIRE(seq[0].cable_command.has_value());
    CHECK(seq[0].cable_command->kind == CableCommand::Kind::Release);
    CHECK(seq[0].cable_command->leaves == LeafSet::all());
    CHECK(seq[0].ordering == CommandOrdering::CableFirst);
    CHECK(seq[1].pneumatic_targets_kpa == inflated);
  }
  SUBCASE("neutral shares the withdrawal posture") {
    CHECK(entry_sequence(Mode::neutral(), cfg) == entry_sequence(Mode::withdrawal(), cfg));
  }
  SUBCASE("waving deflates, then waves with the configured defaults") {
    const auto seq = entry_sequence(Mode::waving(), cfg);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].pneumatic_targets_kpa == zero);
    REQUIRE(seq[1].cable_command.has_value());
    CHECK(seq[1].cable_command->kind == CableCommand::Kind::Wave);
    CHECK(seq[1].cable_command->wave.frequency_hz == cfg.wave.frequency_hz);
  }
  SUBCASE("avoidance deflates and lifts only the addressed leaf") {
    const auto seq = entry_sequence(Mode::avoidance(LeafSet{1}), cfg, inflated);
    REQUIRE(seq.size() == 2);
    REQUIRE(seq[0].pneumatic_targets_kpa.has_value());
    CHECK((*seq[0].pneumatic_targets_kpa)[0] == 25.0);
    CHECK((*seq[0].pneumatic_targets_kpa)[1] == 0.0);
    CHECK((*seq[0].pneumatic_targets_kpa)[2] == 25.0);
    REQUIRE(seq[1].cable_command.has_value());
    CHECK(seq[1].cable_command->kind == CableCommand::Kind::PullUp);
    CHECK(seq[1].cable_command->leaves == LeafSet{1});
  }
  SUBCASE("override entries borrow the preset's sequence") {
    CHECK(entry_sequence(Mode::override_held(Preset::Welcoming), cfg) ==
          entry_sequence(Mode::welcoming(), cfg));
  }
}

TEST_CASE("phase ordering invariant") {
  BehaviorConfig cfg;

  // Withdrawal-style entries: the inflation phase never precedes the release.
  for (const Mode& mode :
       {Mode::withdrawal(), Mode::neutral(), Mode::override_held(Preset::Withdrawal)}) {
    const auto seq = entry_sequence(mode, cfg);
    int release_at = -1;
    int inflate_at = -1;
    for (int i = 0; i < int(seq.size()); ++i) {
      const auto& phase = seq[std::size_t(i)];
      if (phase.cable_command && phase.cable_command->kind == CableCommand::Kind::Release) {
        release_at = i;
      }
      if (phase.pneumatic_targets_kpa && (*phase.pneumatic_targets_kpa)[0] > 0.0) {
        inflate_at = i;
      }
    }
    REQUIRE(release_at >= 0);
    REQUIRE(inflate_at >= 0);
    CHECK(release_at < inflate_at);
  }

  // Welcoming-style entries: the pull-up (or wave) never precedes deflation of
  // the leaves it lifts.
  for (const Mode& mode : {Mode::welcoming(), Mode::waving(),
                           Mode::avoidance(LeafSet{0, 2}),
                           Mode::override_held(Preset::Welcoming)}) {
    const auto seq = entry_sequence(mode, cfg, {25.0, 25.0, 25.0});
    int deflate_at = -1;
    int lift_at = -1;
    LeafSet lifted;
    for (int i = 0; i < int(seq.size()); ++i) {
      const auto& phase = seq[std::size_t(i)];
      if (phase.cable_command && (phase.cable_command->kind == CableCommand::Kind::PullUp ||
                                  phase.cable_command->kind == CableCommand::Kind::Wave)) {
        lift_at = i;
        lifted = phase.cable_command->leaves;
      }
    }
    REQUIRE(lift_at >= 0);
    for (int i = 0; i < int(seq.size()); ++i) {
      const auto& phase = seq[std::size_t(i)];
      if (!phase.pneumatic_targets_kpa) continue;
      bool deflates_lifted = true;
      for (int leaf = 0; leaf < kNumLeaves; ++leaf) {
        if (lifted.contains(leaf) && (*phase.pneumatic_targets_kpa)[std::size_t(leaf)] != 0.0) {
          deflates_lifted = false;
        }
      }
      if (deflates_lifted) deflate_at = i;
    }
    REQUIRE(deflate_at >= 0);
    CHECK(deflate_at < lift_at);
  }
}

TEST_CASE("sequencer walks phases on telemetry confirmation") {
  BehaviorConfig cfg;
  BehaviorState st;  // entry pending, Neutral

  // Tick 1: neutral entry emits the release phase.
  auto r = step(st, {}, std::nullopt, {}, cfg);
  CHECK(r.state.entry_phase(cfg) == EntryPhase::CablePhase);
  REQUIRE(r.commands.cable_command.has_value());
  CHECK(r.commands.cable_command->kind == CableCommand::Kind::Release);

  // Unconfirmed telemetry: no advancement, nothing emitted.
  auto hold = step(r.state, {}, std::nullopt, telemetry_at({0, 0, 0}, LeafMode::Winding, 40.0),
                   cfg);
  CHECK(hold.commands.empty());
  CHECK(hold.state.phase_index == r.state.phase_index);

  // Settled at zero confirms the release; the inflation phase goes out.
  auto adv = step(r.state, {}, std::nullopt, telemetry_at({0, 0, 0}), cfg);
  REQUIRE(adv.commands.pneumatic_targets_kpa.has_value());
  CHECK((*adv.commands.pneumatic_targets_kpa)[0] == cfg.p_inflate_kpa);
  CHECK(adv.state.entry_phase(cfg) == EntryPhase::PneumaticPhase);
  CHECK(!adv.phase_timed_out);

  // Pressure within the confirm band settles the entry.
  auto done = step(adv.state, {}, std::nullopt,
                   telemetry_at({24.2, 25.8, 25.0}), cfg);
  CHECK(done.state.entry_phase(cfg) == EntryPhase::Settled);
  CHECK(done.commands.empty());
}

TEST_CASE("sequencer times out and flags the advance") {
  BehaviorConfig cfg;  // 3 s timeout at 0.02 s per tick = 150 ticks
  BehaviorState st;
  auto r = step(st, {}, std::nullopt, {}, cfg);  // release phase emitted

  const SubsystemTelemetry never_confirms = telemetry_at({9, 9, 9}, LeafMode::Winding, 40.0);
  int ticks = 0;
  while (ticks < 400) {
    ++ticks;
    r = step(r.state, {}, std::nullopt, never_confirms, cfg);
    if (r.phase_timed_out) break;
  }
  CHECK(r.phase_timed_out);
  CHECK(ticks == 149);  // entry tick + 149 = 150 ticks in phase
  REQUIRE(r.commands.pneumatic_targets_kpa.has_value());  // advanced anyway
}

TEST_CASE("mode changes mid-entry restart the sequence") {
  BehaviorConfig cfg;
  BehaviorState st;
  auto r = step(st, {}, std::nullopt, {}, cfg);  // neutral entry, release phase
  // A crowd stabilizes before the entry finishes: withdrawal takes over.
  r = step(r.state, {}, stable_persons(2, 1.0), telemetry_at({0, 0, 0}, LeafMode::Winding, 5),
           cfg);
  CHECK(r.state.mode == Mode::withdrawal());
  CHECK(r.state.phase_index == 0);
  REQUIRE(r.commands.cable_command.has_value());
  CHECK(r.commands.cable_command->kind == CableCommand::Kind::Release);
}

TEST_CASE("release of the override returns control to perception") {
  BehaviorConfig cfg;
  const auto tlm = telemetry_at({0, 0, 0});
  OverrideLatch latch{true, Preset::Waving};
  auto r = step(settled_in(Mode::neutral(), cfg), latch, stable_persons(0, 0), tlm, cfg);
  CHECK(r.state.mode == Mode::override_held(Preset::Waving));

  latch = apply_override(latch, ButtonEvent::release());
  r = step(r.state, latch, stable_persons(1, 1.0), tlm, cfg);
  CHECK(r.state.mode == Mode::welcoming());
}

TEST_CASE("mode strings") {
  CHECK(Mode::neutral().to_string() == "Neutral");
  CHECK(Mode::avoidance(LeafSet{0, 2}).to_string() == "Avoidance(0|2)");
  CHECK(Mode::override_held(Preset::Waving).to_string() == "OverrideHeld(Waving)");
}
