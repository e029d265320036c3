#include "sumbrella/perception.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>

#include <json.hpp>

namespace sumbrella {

namespace {

constexpr double kPi = std::numbers::pi;

bool detection_valid(const Detection& d) {
  return std::isfinite(d.confidence) && d.confidence >= 0.0 && d.confidence <= 1.0 &&
         std::isfinite(d.distance_m) && d.distance_m > 0.0 &&
         std::isfinite(d.bearing_rad) && d.bearing_rad >= -kPi && d.bearing_rad <= kPi;
}

// 0 empty scene, 1 one person, 2 two or more.
int person_bucket(int persons_within) { return std::min(persons_within, 2); }

}  // namespace

int sector_of(double bearing_rad) {
  constexpr double third = kPi / 3.0;
  double b = bearing_rad;
  if (b >= kPi) b = -kPi;  // fold +pi onto -pi
  if (b >= -third && b < third) return 0;
  if (b >= third) return 1;
  return 2;
}

PerceptionSummary summarize(std::span<const Detection> frame, const PerceptionConfig& cfg) {
  PerceptionSummary out;
  for (const Detection& d : frame) {
    if (!detection_valid(d)) {
      ++out.rejected_detections;
      continue;
    }
    if (d.confidence < cfg.c_min) continue;
    if (d.cls == DetectionClass::Person && d.distance_m <= cfg.r_social_m) {
      ++out.persons_within;
      if (!out.min_person_distance_m || d.distance_m < *out.min_person_distance_m) {
        out.min_person_distance_m = d.distance_m;
      }
    }
    if (d.distance_m <= cfg.r_avoid_m) {
      out.obstacle_sectors.insert(sector_of(d.bearing_rad));
    }
  }
  return out;
}

std::optional<StablePerceptionSummary> Debouncer::push(const PerceptionSummary& summary,
                                                       const PerceptionConfig& cfg) {
  const int bucket = person_bucket(summary.persons_within);
  if (bucket == last_bucket_ && summary.obstacle_sectors == last_sectors_) {
    ++run_length_;
  } else {
    last_bucket_ = bucket;
    last_sectors_ = summary.obstacle_sectors;
    run_length_ = 1;
  }
  if (run_length_ >= cfg.debounce_frames) {
    return StablePerceptionSummary{summary, run_length_};
  }
  return std::nullopt;
}

DetectionLog ingest_log(std::istream& in) {
  if (!in) throw IngestError("detection log: unreadable stream");

  DetectionLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || j.size() != 2 || !j.contains("t") ||
        !j.contains("dets") || !j["t"].is_number() || !j["dets"].is_array()) {
      ++log.skipped_lines;
      continue;
    }

    TimedFrame frame;
    frame.t_s = j["t"].get<double>();
    bool ok = std::isfinite(frame.t_s) && frame.t_s >= 0.0;
    for (const auto& dj : j["dets"]) {
      if (!ok) break;
      if (!dj.is_object() || dj.size() != 4 || !dj.contains("cls") || !dj.contains("conf") ||
          !dj.contains("dist_m") || !dj.contains("bearing_rad") || !dj["cls"].is_string() ||
          !dj["conf"].is_number() || !dj["dist_m"].is_number() ||
          !dj["bearing_rad"].is_number()) {
        ok = false;
        break;
      }
      Detection d;
      const std::string cls = dj["cls"].get<std::string>();
      if (cls == "person") {
        d.cls = DetectionClass::Person;
      } else if (cls == "object") {
        d.cls = DetectionClass::Object;
      } else {
        ok = false;
        break;
      }
      d.confidence = dj["conf"].get<double>();
      d.distance_m = dj["dist_m"].get<double>();
      d.bearing_rad = dj["bearing_rad"].get<double>();
      if (!detection_valid(d)) {
        ok = false;
        break;
      }
      frame.detections.push_back(d);
    }

    if (ok) {
      log.frames.push_back(std::move(frame));
    } else {
      ++log.skipped_lines;
    }
  }
  if (in.bad()) throw IngestError("detection log: read failure");

  std::stable_sort(log.frames.begin(), log.frames.end(),
                   [](const TimedFrame& a, const TimedFrame& b) { return a.t_s < b.t_s; });
  return log;
}

}  // namespace sumbrella
