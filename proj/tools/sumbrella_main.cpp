// Command-line harness: scenario runs, detection-log replays, protocol
// fuzzing, PID step-response reports and scenario validation.
//
// Exit codes: 0 success, 1 validation/IO error, 2 simulation fault,
// 3 fuzz assertion failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sumbrella/config.hpp"
#include "sumbrella/perception.hpp"
#include "sumbrella/scenario.hpp"
#include "sumbrella/sim.hpp"
#include "sumbrella/trace.hpp"

namespace {

using namespace sumbrella;

TraceFormat parse_format(const std::string& name) {
  if (name == "csv") return TraceFormat::Csv;
  if (name == "jsonl") return TraceFormat::Jsonl;
  throw CLI::ValidationError("--format", "must be csv or jsonl");
}

Config load_config_opt(const std::string& path) {
  return path.empty() ? Config{} : load_config_file(path);
}

void emit_trace(const RunResult& result, const std::string& dest, const std::string& format) {
  const TraceFormat fmt = parse_format(format);
  if (dest.empty()) {
    write_trace(result.trace, fmt, std::cout);
    return;
  }
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace destination: " + dest);
  write_trace(result.trace, fmt, out);
  if (!out) throw std::runtime_error("failed writing trace to: " + dest);
}

int run_cmd(const std::string& scenario_path, const std::string& config_path,
            const std::string& trace_path, const std::string& format,
            std::optional<std::uint64_t> seed, bool bypass_codec) {
  Scenario sc = load_scenario_file(scenario_path);
  if (seed) sc.meta.seed = *seed;
  const Config cfg = load_config_opt(config_path);

  RunOptions opts;
  opts.bypass_codec = bypass_codec;
  const RunResult result = run(sc, cfg, opts);
  emit_trace(result, trace_path, format);
  std::cerr << "ticks=" << result.trace.size() << " decode_errors=" << result.decode_errors
            << " dropped_detections=" << result.dropped_detections << "\n";
  return 0;
}

int replay_cmd(const std::string& log_path, const std::string& config_path,
               const std::string& trace_path, const std::string& format) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open detection log: " + log_path);
  const DetectionLog log = ingest_log(in);
  if (log.skipped_lines > 0) {
    std::cerr << "skipped " << log.skipped_lines << " malformed line(s)\n";
  }
  const Config cfg = load_config_opt(config_path);
  const RunResult result = replay(log, cfg, ScenarioMeta{});
  emit_trace(result, trace_path, format);
  return 0;
}

int fuzz_cmd(std::uint64_t n, std::uint64_t seed) {
  const FuzzReport rep = fuzz_protocol(n, seed);
  std::cout << "{\"round_trips\":" << rep.round_trips << ",\"failures\":" << rep.failures
            << ",\"resync_trials\":" << rep.resync_trials
            << ",\"undetected_corruptions\":" << rep.undetected_corruptions
            << ",\"seed\":" << rep.seed << "}\n";
  if (rep.failures != 0 || rep.undetected_corruptions != 0) {
    std::cerr << "fuzz failure: " << rep.first_failure << "\n";
    return 3;
  }
  return 0;
}

int pid_step_cmd(double target, const std::string& config_path, const std::string& report_path) {
  const Config cfg = load_config_opt(config_path);
  if (target < 0.0 || target > cfg.pneumatics.p_max_kpa) {
    std::cerr << "--target must be in [0, " << cfg.pneumatics.p_max_kpa << "] kPa\n";
    return 1;
  }
  const StepReport rep = pid_step_report(target, cfg);
  const std::string json = "{\"target_kpa\":" + format_sig(target) +
                           ",\"rise_time_s\":" + format_sig(rep.rise_time_s) +
                           ",\"overshoot_pct\":" + format_sig(rep.overshoot_pct) +
                           ",\"settling_time_s\":" + format_sig(rep.settling_time_s) +
                           ",\"steady_state_error_kpa\":" +
                           format_sig(rep.steady_state_error_kpa) + "}\n";
  if (report_path.empty()) {
    std::cout << json;
  } else {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open report destination: " + report_path);
    out << json;
  }
  return 0;
}

int validate_cmd(const std::string& scenario_path) {
  const Scenario sc = load_scenario_file(scenario_path);
  std::cout << "valid: " << sc.events.size() << " event(s), " << sc.meta.duration_s
            << " s at " << sc.meta.tick_hz << " Hz (perception " << sc.meta.perception_hz
            << " Hz), seed " << sc.meta.seed << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wearable soft-robot control harness: behavior FSM, cable drive, "
               "pneumatics and simulated plant"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string config_path;
  std::string trace_path;
  std::string format = "csv";
  std::uint64_t seed_value = 0;
  bool seed_given = false;
  bool bypass_codec = false;

  auto* run_sc = app.add_subcommand("run", "Run a scenario and emit the per-tick trace");
  run_sc->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run_sc->add_option("--config", config_path, "Config JSON file");
  run_sc->add_option("--trace", trace_path, "Trace destination (default: stdout)");
  run_sc->add_option("--format", format, "csv or jsonl")->capture_default_str();
  run_sc->add_option("--seed", seed_value, "Override the scenario seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  run_sc->add_flag("--bypass-codec", bypass_codec,
                   "Debug: hand messages across without the byte codec");

  std::string log_path;
  auto* replay_sc = app.add_subcommand("replay", "Re-run perception from a detection log");
  replay_sc->add_option("detections", log_path, "Detection JSONL file")->required();
  replay_sc->add_option("--config", config_path, "Config JSON file");
  replay_sc->add_option("--trace", trace_path, "Trace destination (default: stdout)");
  replay_sc->add_option("--format", format, "csv or jsonl")->capture_default_str();

  std::uint64_t fuzz_n = 100000;
  std::uint64_t fuzz_seed = 42;
  auto* fuzz_sc = app.add_subcommand("fuzz-protocol", "Round-trip and corruption fuzzing");
  fuzz_sc->add_option("--n", fuzz_n, "Number of messages")->capture_default_str();
  fuzz_sc->add_option("--seed", fuzz_seed, "Fuzz seed")->capture_default_str();

  double target_kpa = 25.0;
  std::string report_path;
  auto* pid_sc = app.add_subcommand("pid-step", "Step-response metrics for one chamber");
  pid_sc->add_option("--target", target_kpa, "Step target in kPa")->required();
  pid_sc->add_option("--report", report_path, "Report destination (default: stdout)");
  pid_sc->add_option("--config", config_path, "Config JSON file");

  auto* val_sc = app.add_subcommand("validate", "Validate a scenario file");
  val_sc->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_sc->parsed()) {
      return run_cmd(scenario_path, config_path, trace_path, format,
                     seed_given ? std::optional(seed_value) : std::nullopt, bypass_codec);
    }
    if (replay_sc->parsed()) return replay_cmd(log_path, config_path, trace_path, format);
    if (fuzz_sc->parsed()) return fuzz_cmd(fuzz_n, fuzz_seed);
    if (pid_sc->parsed()) return pid_step_cmd(target_kpa, config_path, report_path);
    if (val_sc->parsed()) return validate_cmd(scenario_path);
  } catch (const SimulationFault& e) {
    std::cerr << "simulation fault: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
