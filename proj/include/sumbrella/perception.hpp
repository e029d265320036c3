#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sumbrella/config.hpp"
#include "sumbrella/leaf.hpp"

namespace sumbrella {

enum class DetectionClass { Person, Object };

struct Detection {
  DetectionClass cls = DetectionClass::Person;
  double confidence = 0.0;   // [0, 1]
  double distance_m = 0.0;   // finite, > 0
  double bearing_rad = 0.0;  // [-pi, pi], 0 is straight ahead of the wearer
};

struct PerceptionSummary {
  int persons_within = 0;  // persons with conf >= c_min and dist <= r_social
  std::optional<double> min_person_distance_m;
  LeafSet obstacle_sectors;     // sectors with any detection inside r_avoid
  int rejected_detections = 0;  // malformed entries dropped from the frame

  bool operator==(const PerceptionSummary&) const = default;
};

struct StablePerceptionSummary {
  PerceptionSummary summary;
  int frames_stable = 0;  // >= debounce_frames when delivered
};

// Maps a bearing to one of three 120-degree sectors aligned with the leaves:
// sector 0 = [-pi/3, pi/3), sector 1 = [pi/3, pi), sector 2 = [-pi, -pi/3).
// +pi folds onto -pi so the partition covers [-pi, pi].
int sector_of(double bearing_rad);

PerceptionSummary summarize(std::span<const Detection> frame, const PerceptionConfig& cfg);

// Emits a stable summary once the mode-relevant bucket (person count in
// {0, 1, >=2} plus the obstacle-sector set) has repeated for debounce_frames
// consecutive frames. Emits nothing while the bucket is still settling.
class Debouncer {
 public:
  std::optional<StablePerceptionSummary> push(const PerceptionSummary& summary,
                                              const PerceptionConfig& cfg);

 private:
  int run_length_ = 0;
  int last_bucket_ = -1;
  LeafSet last_sectors_;
};

struct TimedFrame {
  double t_s = 0.0;
  std::vector<Detection> detections;
};

struct DetectionLog {
  std::vector<TimedFrame> frames;  // sorted by timestamp
  int skipped_lines = 0;
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a JSONL detection log, one frame per line:
//   {"t": 1.5, "dets": [{"cls": "person", "conf": 0.9, "dist_m": 1.2, "bearing_rad": 0.0}]}
// Malformed lines are skipped and counted; an unreadable stream throws.
DetectionLog ingest_log(std::istream& in);

}  // namespace sumbrella
