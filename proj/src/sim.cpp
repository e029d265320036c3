#include "sumbrella/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "sumbrella/behavior.hpp"
#include "sumbrella/cable.hpp"
#include "sumbrella/plant.hpp"
#include "sumbrella/pneumatics.hpp"
#include "sumbrella/rng.hpp"

namespace sumbrella {

namespace {

using wire::Message;

// --- quantization between domain values and wire fields ---

std::uint16_t q_dkpa(double kpa) {
  return std::uint16_t(std::clamp<long long>(std::llround(kpa * 10.0), 0, 65535));
}
double dq_dkpa(std::uint16_t v) { return double(v) / 10.0; }

std::uint8_t q8(double frac) {
  return std::uint8_t(std::clamp<long long>(std::llround(frac * 255.0), 0, 255));
}
double dq8(std::uint8_t v) { return double(v) / 255.0; }

std::uint16_t q_chz(double hz) {
  return std::uint16_t(std::clamp<long long>(std::llround(hz * 100.0), 0, 65535));
}
double dq_chz(std::uint16_t v) { return double(v) / 100.0; }

std::uint16_t q_mrad(double rad) {
  const double two_pi = 2.0 * std::numbers::pi;
  double p = std::fmod(rad, two_pi);
  if (p < 0.0) p += two_pi;
  return std::uint16_t(std::clamp<long long>(std::llround(p * 1000.0), 0, 65535));
}
double dq_mrad(std::uint16_t v) { return double(v) / 1000.0; }

std::uint16_t q_dtorque(double torque) {
  return std::uint16_t(std::clamp<long long>(std::llround(torque * 10.0), 0, 65535));
}

wire::CmdPneuTargets make_pneu_targets(const std::array<double, 3>& kpa) {
  wire::CmdPneuTargets m;
  for (int i = 0; i < 3; ++i) m.target_dkpa[size_t(i)] = q_dkpa(kpa[size_t(i)]);
  return m;
}

wire::CmdCableWaveParams make_wave_params(const WaveParams& w) {
  wire::CmdCableWaveParams m;
  const std::uint8_t a = q8(w.amplitude);
  m.amplitude_q8 = {a, a, a};
  m.frequency_chz = q_chz(w.frequency_hz);
  for (int i = 0; i < 3; ++i) m.phase_mrad[size_t(i)] = q_mrad(w.phase_rad[size_t(i)]);
  return m;
}

std::uint8_t cable_mode_code(CableCommand::Kind k) {
  switch (k) {
    case CableCommand::Kind::Hold: return wire::kCableModeHold;
    case CableCommand::Kind::PullUp: return wire::kCableModePullUp;
    case CableCommand::Kind::Release: return wire::kCableModeRelease;
    case CableCommand::Kind::Wave: return wire::kCableModeWave;
  }
  return wire::kCableModeHold;
}

// One serial link: encodes outgoing messages, feeds them through the
// receiving decoder, and returns what arrived. In bypass mode the structs are
// handed across directly; quantization already happened when they were built.
struct Link {
  wire::Decoder decoder;

  std::vector<Message> deliver(
      const std::vector<Message>& msgs, bool bypass, std::uint64_t& decode_errors,
      std::vector<std::pair<Message, std::vector<std::uint8_t>>>* log) {
    if (bypass) return msgs;
    std::vector<Message> out;
    for (const Message& m : msgs) {
      std::vector<std::uint8_t> bytes = wire::encode(m);
      if (log) log->emplace_back(m, bytes);
      wire::DecodeResult res = decoder.push(bytes);
      decode_errors += res.errors.size();
      for (Message& dm : res.messages) out.push_back(std::move(dm));
    }
    return out;
  }
};

struct Polar {
  double dist_m;
  double bearing_rad;
};

// Shared control-loop core for scenario runs and detection-log replays.
class Engine {
 public:
  Engine(const Config& cfg, const ScenarioMeta& meta, const RunOptions& opts)
      : cfg_(cfg),
        meta_(meta),
        opts_(opts),
        dt_(1.0 / meta.tick_hz),
        plant_(cfg.plant, meta.seed ^ 0x706C616E74ull) {
    cfg_.behavior.tick_dt_s = dt_;
  }

  const Config& config() const { return cfg_; }
  double dt() const { return dt_; }
  Plant& plant() { return plant_; }

  void set_latch(const OverrideLatch& latch) { latch_ = latch; }
  OverrideLatch latch() const { return latch_; }

  void push_frame(const std::vector<Detection>& frame) {
    latest_raw_ = summarize(frame, cfg_.perception);
    if (auto stable = debouncer_.push(latest_raw_, cfg_.perception)) {
      latest_stable_ = *stable;
    }
  }

  // Runs one 50 Hz control tick: behavior step, command links, both subsystem
  // controllers, plant integration, telemetry links, trace row.
  void control_tick(std::int64_t tick, RunResult& out) {
    const StepResult sr =
        step(behavior_, latch_, latest_stable_, telemetry_, cfg_.behavior);
    behavior_ = sr.state;

    std::vector<Message> to_cable;
    std::vector<Message> to_pneu;
    collect_command_messages(sr.commands, to_cable, to_pneu);
    if (tick % meta_.tick_hz == 0) {
      const wire::Heartbeat hb{std::uint16_t(tick / meta_.tick_hz)};
      to_cable.push_back(hb);
      to_pneu.push_back(hb);
    }

    auto log = opts_.bypass_codec ? nullptr : &out.command_log;
    std::optional<CableCommand> cable_cmd;
    std::vector<Message> ack_cable;
    for (const Message& m :
         cable_link_.deliver(to_cable, opts_.bypass_codec, out.decode_errors, log)) {
      if (const auto* wp = std::get_if<wire::CmdCableWaveParams>(&m)) {
        pending_wave_.amplitude = dq8(wp->amplitude_q8[0]);
        pending_wave_.frequency_hz = dq_chz(wp->frequency_chz);
        for (int i = 0; i < 3; ++i) {
          pending_wave_.phase_rad[size_t(i)] = dq_mrad(wp->phase_mrad[size_t(i)]);
        }
      } else if (const auto* sm = std::get_if<wire::CmdCableSetMode>(&m)) {
        const LeafSet leaves(sm->leaf_mask);
        switch (sm->mode) {
          case wire::kCableModeHold: cable_cmd = CableCommand::hold(); break;
          case wire::kCableModePullUp: cable_cmd = CableCommand::pull_up(leaves); break;
          case wire::kCableModeRelease: cable_cmd = CableCommand::release(leaves); break;
          case wire::kCableModeWave:
            cable_cmd = CableCommand::waving(pending_wave_, leaves);
            break;
          default: break;
        }
      } else if (const auto* hb = std::get_if<wire::Heartbeat>(&m)) {
        ack_cable.push_back(wire::Ack{std::uint8_t(wire::MsgType::Heartbeat), hb->seq});
      }
    }

    std::vector<Message> ack_pneu;
    for (const Message& m :
         pneu_link_.deliver(to_pneu, opts_.bypass_codec, out.decode_errors, log)) {
      if (const auto* tg = std::get_if<wire::CmdPneuTargets>(&m)) {
        for (int i = 0; i < 3; ++i) {
          targets_.kpa[size_t(i)] = dq_dkpa(tg->target_dkpa[size_t(i)]);
        }
      } else if (const auto* hb = std::get_if<wire::Heartbeat>(&m)) {
        ack_pneu.push_back(wire::Ack{std::uint8_t(wire::MsgType::Heartbeat), hb->seq});
      }
    }

    // Controllers read the sensors as of the end of the previous tick.
    const std::array<double, 3> torque{plant_.torque(0), plant_.torque(1), plant_.torque(2)};
    const std::array<double, 3> pressure{plant_.pressure_kpa(0), plant_.pressure_kpa(1),
                                         plant_.pressure_kpa(2)};
    const CableStepResult cr = cable_step(cable_, cable_cmd, torque, dt_, cfg_.cable);
    cable_ = cr.state;
    const PneuStepResult pr = pneu_step(pneu_, targets_, pressure, dt_, cfg_.pneumatics);
    pneu_ = pr.state;

    try {
      plant_.step({pr.route, pr.duty, pr.exhaust_duty, cr.output.velocity_ticks_per_s}, dt_);
    } catch (const PlantFault& f) {
      throw SimulationFault(tick, f.what());
    }

    deliver_telemetry(torque, pr, std::move(ack_cable), std::move(ack_pneu), out);
    out.trace.push_back(make_row(tick, sr, pr));
  }

 private:
  void collect_command_messages(const CommandSet& cs, std::vector<Message>& to_cable,
                                std::vector<Message>& to_pneu) const {
    auto add_pneu = [&] {
      if (cs.pneumatic_targets_kpa) to_pneu.push_back(make_pneu_targets(*cs.pneumatic_targets_kpa));
    };
    auto add_cable = [&] {
      if (!cs.cable_command) return;
      const CableCommand& c = *cs.cable_command;
      if (c.kind == CableCommand::Kind::Wave) to_cable.push_back(make_wave_params(c.wave));
      const std::uint8_t mask = c.kind == CableCommand::Kind::Hold ? 0x7 : c.leaves.mask();
      to_cable.push_back(wire::CmdCableSetMode{mask, cable_mode_code(c.kind)});
    };
    if (cs.ordering == CommandOrdering::CableFirst) {
      add_cable();
      add_pneu();
    } else {
      add_pneu();
      add_cable();
    }
  }

  void deliver_telemetry(const std::array<double, 3>& measured_torque,
                         const PneuStepResult& pr, std::vector<Message> ack_cable,
                         std::vector<Message> ack_pneu, RunResult& out) {
    wire::TlmCableStatus ct;
    for (int i = 0; i < 3; ++i) {
      const auto s = size_t(i);
      ct.mode[s] = std::uint8_t(cable_.mode[s]);
      ct.position[s] = std::int32_t(std::llround(cable_.position_ticks[s]));
      ct.torque_raw[s] = q_dtorque(measured_torque[s]);
    }
    wire::TlmPneuStatus pt;
    for (int i = 0; i < 3; ++i) {
      const auto s = size_t(i);
      pt.pressure_dkpa[s] = q_dkpa(pr.telemetry.pressure_kpa[s]);
      pt.route[s] = std::uint8_t(pr.telemetry.route[s]);
      pt.duty_q8[s] = q8(pr.telemetry.pump_duty[s]);
    }

    std::vector<Message> from_cable = std::move(ack_cable);
    from_cable.push_back(ct);
    std::vector<Message> from_pneu = std::move(ack_pneu);
    from_pneu.push_back(pt);

    for (const Message& m : cable_tlm_link_.deliver(from_cable, opts_.bypass_codec,
                                                    out.decode_errors, nullptr)) {
      if (const auto* t = std::get_if<wire::TlmCableStatus>(&m)) {
        CableTelemetry tlm;
        for (int i = 0; i < 3; ++i) {
          const auto s = size_t(i);
          tlm.mode[s] = LeafMode(t->mode[s]);
          tlm.position_ticks[s] = double(t->position[s]);
          tlm.torque[s] = double(t->torque_raw[s]) / 10.0;
        }
        telemetry_.cable = tlm;
      }
    }
    for (const Message& m : pneu_tlm_link_.deliver(from_pneu, opts_.bypass_codec,
                                                   out.decode_errors, nullptr)) {
      if (const auto* t = std::get_if<wire::TlmPneuStatus>(&m)) {
        PneuTelemetry tlm;
        for (int i = 0; i < 3; ++i) {
          const auto s = size_t(i);
          tlm.pressure_kpa[s] = dq_dkpa(t->pressure_dkpa[s]);
          tlm.route[s] = ValveRoute(t->route[s]);
          tlm.duty[s] = dq8(t->duty_q8[s]);
        }
        telemetry_.pneumatic = tlm;
      }
    }
  }

  TraceRow make_row(std::int64_t tick, const StepResult& sr, const PneuStepResult& pr) const {
    TraceRow row;
    row.tick = tick;
    row.t_s = double(tick) * dt_;
    row.fsm_mode = behavior_.mode.to_string();
    row.override_active = latch_.active;
    row.persons_within = latest_raw_.persons_within;
    row.min_dist_m = latest_raw_.min_person_distance_m;
    row.obstacle_sectors = latest_raw_.obstacle_sectors.mask();
    for (int i = 0; i < 3; ++i) {
      const auto s = size_t(i);
      auto& leaf = row.leaf[s];
      leaf.pressure_kpa = plant_.pressure_kpa(i);
      leaf.popped = plant_.popped(i);
      leaf.winch_pos = plant_.winch_position(i);
      const double denom = cable_.recorded_displacement[s]
                               ? std::max(1.0, *cable_.recorded_displacement[s])
                               : plant_.x_stall(i);
      const double x_norm = std::clamp(leaf.winch_pos / denom, 0.0, 1.0);
      const LeafPose pose = leaf_pose(x_norm, leaf.popped, cfg_.plant);
      leaf.curl_rad = pose.curl_rad;
      leaf.elev_rad = pose.elevation_rad;
      leaf.route = int(pr.route[s]);
      leaf.pump_duty = pr.duty[s];
    }
    row.seq_timeout = sr.phase_timed_out;
    return row;
  }

  Config cfg_;
  ScenarioMeta meta_;
  RunOptions opts_;
  double dt_;

  Plant plant_;
  CableState cable_;
  PneumaticsState pneu_;
  PneumaticTargets targets_;
  BehaviorState behavior_;
  OverrideLatch latch_;

  Debouncer debouncer_;
  PerceptionSummary latest_raw_;
  std::optional<StablePerceptionSummary> latest_stable_;
  SubsystemTelemetry telemetry_;

  Link cable_link_;      // central -> cable subsystem
  Link pneu_link_;       // central -> pneumatic subsystem
  Link cable_tlm_link_;  // cable subsystem -> central
  Link pneu_tlm_link_;   // pneumatic subsystem -> central
  WaveParams pending_wave_;
};

}  // namespace

SimulationFault::SimulationFault(std::int64_t tick_, const std::string& what)
    : std::runtime_error("tick " + std::to_string(tick_) + ": " + what), tick(tick_) {}

RunResult run(const Scenario& scenario, const Config& config, const RunOptions& opts) {
  Config cfg = config;
  apply_config_overrides(cfg, scenario.config_overrides);

  Engine engine(cfg, scenario.meta, opts);
  RunResult out;

  Rng rng(scenario.meta.seed);
  std::map<int, Polar> persons;
  std::map<int, Polar> obstacles;
  std::size_t next_event = 0;

  const std::int64_t n_ticks =
      std::llround(scenario.meta.duration_s * scenario.meta.tick_hz);
  const int stride = scenario.meta.tick_hz / scenario.meta.perception_hz;
  const PerceptionConfig& pcfg = engine.config().perception;

  for (std::int64_t tick = 0; tick < n_ticks; ++tick) {
    const double t = double(tick) * engine.dt();

    while (next_event < scenario.events.size() &&
           scenario.events[next_event].t_s <= t + 1e-9) {
      const ScenarioEvent& ev = scenario.events[next_event++];
      switch (ev.kind) {
        case ScenarioEvent::Kind::SpawnPerson:
        case ScenarioEvent::Kind::MovePerson:
          persons[ev.id] = {ev.dist_m, ev.bearing_rad};
          break;
        case ScenarioEvent::Kind::RemovePerson:
          persons.erase(ev.id);
          break;
        case ScenarioEvent::Kind::SpawnObstacle:
          obstacles[ev.id] = {ev.dist_m, ev.bearing_rad};
          break;
        case ScenarioEvent::Kind::RemoveObstacle:
          obstacles.erase(ev.id);
          break;
        case ScenarioEvent::Kind::PressOverride:
          engine.set_latch(apply_override(engine.latch(), ButtonEvent::press(ev.preset)));
          break;
        case ScenarioEvent::Kind::ReleaseOverride:
          engine.set_latch(apply_override(engine.latch(), ButtonEvent::release()));
          break;
      }
    }

    if (tick % stride == 0) {
      std::vector<Detection> frame;
      frame.reserve(persons.size() + obstacles.size());
      for (const auto& [id, p] : persons) {
        (void)id;
        if (rng.next_double() < pcfg.dropout_prob) {
          ++out.dropped_detections;
          continue;
        }
        frame.push_back({DetectionClass::Person, pcfg.synth_confidence, p.dist_m,
                         p.bearing_rad});
      }
      for (const auto& [id, p] : obstacles) {
        (void)id;
        if (rng.next_double() < pcfg.dropout_prob) {
          ++out.dropped_detections;
          continue;
        }
        frame.push_back({DetectionClass::Object, pcfg.synth_confidence, p.dist_m,
                         p.bearing_rad});
      }
      engine.push_frame(frame);
    }

    engine.control_tick(tick, out);
  }
  return out;
}

RunResult replay(const DetectionLog& log, const Config& config, const ScenarioMeta& meta,
                 const RunOptions& opts) {
  ScenarioMeta m = meta;
  if (m.duration_s <= 0.0) {
    m.duration_s = (log.frames.empty() ? 0.0 : log.frames.back().t_s) + 1.0;
  }

  Engine engine(config, m, opts);
  RunResult out;

  const std::int64_t n_ticks = std::llround(m.duration_s * m.tick_hz);
  std::size_t next_frame = 0;

  for (std::int64_t tick = 0; tick < n_ticks; ++tick) {
    const double t = double(tick) * engine.dt();
    while (next_frame < log.frames.size() && log.frames[next_frame].t_s <= t + 1e-9) {
      engine.push_frame(log.frames[next_frame++].detections);
    }
    engine.control_tick(tick, out);
  }
  return out;
}

namespace {

Message random_message(Rng& rng) {
  switch (rng.next_below(7)) {
    case 0:
      return wire::CmdCableSetMode{std::uint8_t(1 + rng.next_below(7)),
                                   std::uint8_t(rng.next_below(4))};
    case 1: {
      wire::CmdCableWaveParams m;
      for (auto& a : m.amplitude_q8) a = std::uint8_t(rng.next_below(256));
      m.frequency_chz = std::uint16_t(rng.next_below(65536));
      for (auto& p : m.phase_mrad) p = std::uint16_t(rng.next_below(65536));
      return m;
    }
    case 2: {
      wire::CmdPneuTargets m;
      for (auto& t : m.target_dkpa) t = std::uint16_t(rng.next_below(65536));
      return m;
    }
    case 3: {
      wire::TlmCableStatus m;
      for (int i = 0; i < 3; ++i) {
        m.mode[size_t(i)] = std::uint8_t(rng.next_below(5));
        m.position[size_t(i)] = std::int32_t(rng.next_u64());
        m.torque_raw[size_t(i)] = std::uint16_t(rng.next_below(65536));
      }
      return m;
    }
    case 4: {
      wire::TlmPneuStatus m;
      for (int i = 0; i < 3; ++i) {
        m.pressure_dkpa[size_t(i)] = std::uint16_t(rng.next_below(65536));
        m.route[size_t(i)] = std::uint8_t(rng.next_below(3));
        m.duty_q8[size_t(i)] = std::uint8_t(rng.next_below(256));
      }
      return m;
    }
    case 5:
      return wire::Heartbeat{std::uint16_t(rng.next_below(65536))};
    default:
      return wire::Ack{std::uint8_t(rng.next_below(256)), std::uint16_t(rng.next_below(65536))};
  }
}

}  // namespace

FuzzReport fuzz_protocol(std::uint64_t n, std::uint64_t seed) {
  FuzzReport rep;
  rep.seed = seed;
  Rng rng(seed);

  auto note_failure = [&](std::uint64_t index, const char* what) {
    ++rep.failures;
    if (rep.first_failure.empty()) {
      rep.first_failure = std::string(what) + " at message " + std::to_string(index) +
                          " (seed " + std::to_string(seed) + ")";
    }
  };

  for (std::uint64_t i = 0; i < n; ++i) {
    const Message m = random_message(rng);
    const std::vector<std::uint8_t> bytes = wire::encode(m);

    // Round trip under random fragmentation.
    wire::Decoder dec;
    wire::DecodeResult all;
    std::size_t off = 0;
    while (off < bytes.size()) {
      const std::size_t len = 1 + rng.next_below(bytes.size() - off);
      wire::DecodeResult r = dec.push({bytes.data() + off, len});
      for (auto& msg : r.messages) all.messages.push_back(std::move(msg));
      for (auto& err : r.errors) all.errors.push_back(err);
      off += len;
    }
    if (all.messages.size() != 1 || !(all.messages[0] == m) || !all.errors.empty()) {
      note_failure(i, "round-trip mismatch");
    } else {
      ++rep.round_trips;
    }

    // Single-bit corruption in the length/type/payload/crc region, then clean
    // traffic to prove resynchronization. An inflated length byte can keep the
    // decoder waiting for up to one full frame of further bytes before its CRC
    // check fails, so the clean frame is repeated until that bound is covered.
    std::vector<std::uint8_t> corrupted = bytes;
    const std::uint64_t bit = rng.next_below((corrupted.size() - 2) * 8);
    corrupted[2 + bit / 8] ^= std::uint8_t(1u << (bit % 8));

    const Message follow = random_message(rng);
    const std::vector<std::uint8_t> follow_bytes = wire::encode(follow);

    wire::Decoder dec2;
    wire::DecodeResult r1 = dec2.push(corrupted);
    if (!r1.messages.empty()) ++rep.undetected_corruptions;

    bool follow_ok = false;
    bool wrong_message = false;
    std::size_t pushed = 0;
    while (!follow_ok && pushed < wire::kMaxFrame + 2 * follow_bytes.size()) {
      const wire::DecodeResult r = dec2.push(follow_bytes);
      pushed += follow_bytes.size();
      for (const auto& msg : r.messages) {
        if (msg == follow) {
          follow_ok = true;
        } else {
          wrong_message = true;
        }
      }
    }
    if (wrong_message) ++rep.undetected_corruptions;
    if (follow_ok) {
      ++rep.resync_trials;
    } else {
      note_failure(i, "resync failed after corruption");
    }
  }
  return rep;
}

StepReport pid_step_report(double target_kpa, const Config& config) {
  const double dt = config.behavior.tick_dt_s;
  const int n = int(std::llround(10.0 / dt));

  PneumaticsState ps;
  const PneumaticTargets targets{{target_kpa, 0.0, 0.0}};
  ChamberState ch;
  auto trace = std::vector<double>(std::size_t(n));
  for (int k = 0; k < n; ++k) {
    const PneuStepResult pr =
        pneu_step(ps, targets, {ch.pressure_kpa, 0.0, 0.0}, dt, config.pneumatics);
    ps = pr.state;
    ch = chamber_step(ch, pr.duty[0], pr.exhaust_duty, pr.route[0], dt, config.plant, 0);
    trace[size_t(k)] = ch.pressure_kpa;
  }

  StepReport rep;
  if (target_kpa <= 0.0) return rep;  // no excursion, all metrics zero

  const double band = 0.02 * target_kpa;
  double t10 = -1.0;
  double t90 = -1.0;
  double peak = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = trace[size_t(k)];
    const double t = double(k) * dt;
    if (t10 < 0.0 && p >= 0.1 * target_kpa) t10 = t;
    if (t90 < 0.0 && p >= 0.9 * target_kpa) t90 = t;
    if (p > peak) peak = p;
    if (std::abs(p - target_kpa) > band) rep.settling_time_s = double(k + 1) * dt;
  }
  if (t10 >= 0.0 && t90 >= 0.0) rep.rise_time_s = t90 - t10;
  rep.overshoot_pct = std::max(0.0, (peak - target_kpa) / target_kpa * 100.0);

  const std::size_t tail_start = size_t(n) - size_t(n) / 5;  // final 2 s
  double sum = 0.0;
  for (std::size_t k = tail_start; k < size_t(n); ++k) sum += trace[k];
  rep.steady_state_error_kpa = std::abs(sum / double(size_t(n) - tail_start) - target_kpa);
  return rep;
}

}  // namespace sumbrella
