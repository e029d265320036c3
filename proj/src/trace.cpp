#include "sumbrella/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sumbrella {

namespace {

const char* const kScalarColumns[] = {"tick",           "t_s",
                                      "fsm_mode",       "override_active",
                                      "persons_within", "min_dist_m",
                                      "obstacle_sectors"};
const char* const kLeafColumns[] = {"pressure_kpa", "popped",   "winch_pos", "curl_rad",
                                    "elev_rad",     "route",    "pump_duty"};

std::string leaf_column(const char* base, int leaf) {
  return std::string(base) + "_" + char('0' + leaf);
}

void append_csv_header(std::string& out) {
  bool first = true;
  auto put = [&](const std::string& name) {
    if (!first) out += ',';
    first = false;
    out += name;
  };
  for (const char* c : kScalarColumns) put(c);
  for (int leaf = 0; leaf < 3; ++leaf) {
    for (const char* c : kLeafColumns) put(leaf_column(c, leaf));
  }
  put("seq_timeout");
  out += '\n';
}

}  // namespace

std::string format_sig(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

std::string trace_to_string(const std::vector<TraceRow>& trace, TraceFormat format) {
  if (trace.empty()) throw std::invalid_argument("trace is empty");

  std::string out;
  out.reserve(trace.size() * 160);

  if (format == TraceFormat::Csv) {
    append_csv_header(out);
    for (const TraceRow& r : trace) {
      out += std::to_string(r.tick);
      out += ',';
      out += format_sig(r.t_s);
      out += ',';
      out += r.fsm_mode;
      out += ',';
      out += r.override_active ? '1' : '0';
      out += ',';
      out += std::to_string(r.persons_within);
      out += ',';
      if (r.min_dist_m) out += format_sig(*r.min_dist_m);
      out += ',';
      out += std::to_string(int(r.obstacle_sectors));
      for (const auto& leaf : r.leaf) {
        out += ',';
        out += format_sig(leaf.pressure_kpa);
        out += ',';
        out += leaf.popped ? '1' : '0';
        out += ',';
        out += format_sig(leaf.winch_pos);
        out += ',';
        out += format_sig(leaf.curl_rad);
        out += ',';
        out += format_sig(leaf.elev_rad);
        out += ',';
        out += std::to_string(leaf.route);
        out += ',';
        out += format_sig(leaf.pump_duty);
      }
      out += ',';
      out += r.seq_timeout ? '1' : '0';
      out += '\n';
    }
    return out;
  }

  // JSONL, same keys as the CSV header. Rows are flat objects, so the text is
  // assembled directly to keep the 6-significant-digit number format.
  for (const TraceRow& r : trace) {
    out += "{\"tick\":";
    out += std::to_string(r.tick);
    out += ",\"t_s\":";
    out += format_sig(r.t_s);
    out += ",\"fsm_mode\":\"";
    out += r.fsm_mode;  // mode names never need escaping
    out += "\",\"override_active\":";
    out += r.override_active ? "true" : "false";
    out += ",\"persons_within\":";
    out += std::to_string(r.persons_within);
    out += ",\"min_dist_m\":";
    out += r.min_dist_m ? format_sig(*r.min_dist_m) : "null";
    out += ",\"obstacle_sectors\":";
    out += std::to_string(int(r.obstacle_sectors));
    for (int leaf = 0; leaf < 3; ++leaf) {
      const auto& lf = r.leaf[size_t(leaf)];
      out += ",\"" + leaf_column("pressure_kpa", leaf) + "\":" + format_sig(lf.pressure_kpa);
      out += ",\"" + leaf_column("popped", leaf) + "\":" + (lf.popped ? "true" : "false");
      out += ",\"" + leaf_column("winch_pos", leaf) + "\":" + format_sig(lf.winch_pos);
      out += ",\"" + leaf_column("curl_rad", leaf) + "\":" + format_sig(lf.curl_rad);
      out += ",\"" + leaf_column("elev_rad", leaf) + "\":" + format_sig(lf.elev_rad);
      out += ",\"" + leaf_column("route", leaf) + "\":" + std::to_string(lf.route);
      out += ",\"" + leaf_column("pump_duty", leaf) + "\":" + format_sig(lf.pump_duty);
    }
    out += ",\"seq_timeout\":";
    out += r.seq_timeout ? "true" : "false";
    out += "}\n";
  }
  return out;
}

void write_trace(const std::vector<TraceRow>& trace, TraceFormat format, std::ostream& out) {
  out << trace_to_string(trace, format);
  out.flush();
}

std::vector<TraceRow> parse_trace_jsonl(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TraceRow r;
    r.tick = j.at("tick").get<std::int64_t>();
    r.t_s = j.at("t_s").get<double>();
    r.fsm_mode = j.at("fsm_mode").get<std::string>();
    r.override_active = j.at("override_active").get<bool>();
    r.persons_within = j.at("persons_within").get<int>();
    if (!j.at("min_dist_m").is_null()) r.min_dist_m = j.at("min_dist_m").get<double>();
    r.obstacle_sectors = std::uint8_t(j.at("obstacle_sectors").get<int>());
    for (int leaf = 0; leaf < 3; ++leaf) {
      auto& lf = r.leaf[size_t(leaf)];
      lf.pressure_kpa = j.at(leaf_column("pressure_kpa", leaf)).get<double>();
      lf.popped = j.at(leaf_column("popped", leaf)).get<bool>();
      lf.winch_pos = j.at(leaf_column("winch_pos", leaf)).get<double>();
      lf.curl_rad = j.at(leaf_column("curl_rad", leaf)).get<double>();
      lf.elev_rad = j.at(leaf_column("elev_rad", leaf)).get<double>();
      lf.route = j.at(leaf_column("route", leaf)).get<int>();
      lf.pump_duty = j.at(leaf_column("pump_duty", leaf)).get<double>();
    }
    r.seq_timeout = j.at("seq_timeout").get<bool>();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sumbrella
