// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidarperf/detect.hpp"

namespace lidarperf {

/// Positive part of (latency - frame budget) for one frame.
struct DelayRecord {
  std::string scene_id;
  std::size_t frame_index = 0;
  double delay_ms = 0.0;
};

using DelayTrace = std::vector<DelayRecord>;

struct FrameRef {
  std::string scene_id;
  std::size_t frame_index = 0;

  bool operator==(const FrameRef&) const = default;
  auto operator<=>(const FrameRef&) const = default;
};

/// Which frames the pipeline would drop, given accumulated delay.
struct AvailabilityReport {
  double threshold_ms = 0.0;
  std::size_t total_frames = 0;
  std::vector<FrameRef> dropped_frames;
  std::optional<double> drop_fraction;  // empty trace -> undefined, flagged
  std::map<std::string, double> per_scene_fraction;
};

/// delay = max(0, latency - 1000/sensor_rate) per frame.
DelayTrace compute_delays(const LatencyTrace& trace, double sensor_rate_hz);

/// Accumulated-delay frame dropping. The accumulator restarts at every scene
/// boundary; when it reaches the threshold the current frame is dropped, the
/// accumulator is reduced by the threshold, and the dropped frame's own delay
/// is not accumulated.
AvailabilityReport compute_dropped_frames(const DelayTrace& delays,
                                          double threshold_ms);

/// Per-variant comparison row against a designated baseline variant.
struct AvailabilityDelta {
  std::string variant;
  std::optional<double> drop_fraction;
  std::optional<double> delta_vs_baseline;
};

/// Summarizes reports across variants; `baseline_name` must be a key of
/// `reports`.
std::vector<AvailabilityDelta> availability_summary(
    const std::map<std::string, AvailabilityReport>& reports,
    const std::string& baseline_name);

/// CSV: scene_id, frame_index, delay_ms, dropped.
void save_availability_csv(const DelayTrace& delays,
                           const AvailabilityReport& report,
                           const std::filesystem::path& path,
                           const std::string& file_comment);

/// JSON summary of one report.
void save_availability_json(const AvailabilityReport& report,
                            const std::filesystem::path& path,
                            const std::string& config_hash,
                            std::uint64_t seed);

}  // namespace lidarperf
