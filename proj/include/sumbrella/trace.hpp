#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sumbrella {

// One row per control tick. Column order is fixed; see trace.cpp for the
// header. seq_timeout marks ticks where the behavior sequencer advanced a
// phase on timeout rather than telemetry confirmation.
struct TraceRow {
  std::int64_t tick = 0;
  double t_s = 0.0;
  std::string fsm_mode;
  bool override_active = false;
  int persons_within = 0;
  std::optional<double> min_dist_m;
  std::uint8_t obstacle_sectors = 0;  // bitmask, bits 0..2

  struct Leaf {
    double pressure_kpa = 0.0;
    bool popped = false;
    double winch_pos = 0.0;
    double curl_rad = 0.0;
    double elev_rad = 0.0;
    int route = 0;  // 0 Hold, 1 Inflate, 2 Exhaust
    double pump_duty = 0.0;
  };
  std::array<Leaf, 3> leaf{};

  bool seq_timeout = false;
};

enum class TraceFormat { Csv, Jsonl };

// Locale-independent, 6 significant digits, shortest general form.
std::string format_sig(double value);

void write_trace(const std::vector<TraceRow>& trace, TraceFormat format, std::ostream& out);
std::string trace_to_string(const std::vector<TraceRow>& trace, TraceFormat format);

// Inverse of the JSONL writer, for tooling and round-trip checks.
std::vector<TraceRow> parse_trace_jsonl(std::istream& in);

}  // namespace sumbrella
