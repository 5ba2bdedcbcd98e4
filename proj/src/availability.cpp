// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/availability.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"

namespace lidarperf {

DelayTrace compute_delays(const LatencyTrace& trace, double sensor_rate_hz) {
  if (!(sensor_rate_hz > 0.0))
    throw ParameterError("compute_delays: sensor_rate_hz must be positive");
  const double budget_ms = 1000.0 / sensor_rate_hz;
  DelayTrace delays;
  delays.reserve(trace.size());
  for (const LatencyRecord& r : trace) {
    delays.push_back({r.scene_id, r.frame_index,
                      std::max(0.0, r.latency_ms - budget_ms)});
  }
  return delays;
}

AvailabilityReport compute_dropped_frames(const DelayTrace& delays,
                                          double threshold_ms) {
  if (!(threshold_ms > 0.0))
    throw ParameterError("compute_dropped_frames: threshold must be positive");

  AvailabilityReport report;
  report.threshold_ms = threshold_ms;
  report.total_frames = delays.size();

  std::map<std::string, std::pair<std::size_t, std::size_t>> scene_counts;
  double accm = 0.0;
  const std::string* current_scene = nullptr;
  for (const DelayRecord& rec : delays) {
    if (current_scene == nullptr || rec.scene_id != *current_scene) {
      accm = 0.0;  // restart per scene
      current_scene = &rec.scene_id;
    }
    auto& [total, dropped] = scene_counts[rec.scene_id];
    total += 1;
    if (accm >= threshold_ms) {
      accm = std::max(0.0, accm - threshold_ms);
      report.dropped_frames.push_back({rec.scene_id, rec.frame_index});
      dropped += 1;
    } else {
      accm += rec.delay_ms;
    }
  }

  if (report.total_frames > 0) {
    report.drop_fraction = static_cast<double>(report.dropped_frames.size()) /
                           static_cast<double>(report.total_frames);
    for (const auto& [scene, counts] : scene_counts)
      report.per_scene_fraction[scene] =
          static_cast<double>(counts.second) /
          static_cast<double>(counts.first);
  }
  return report;
}

std::vector<AvailabilityDelta> availability_summary(
    const std::map<std::string, AvailabilityReport>& reports,
    const std::string& baseline_name) {
  if (reports.empty())
    throw ParameterError("availability_summary: need at least one report");
  const auto base_it = reports.find(baseline_name);
  if (base_it == reports.end())
    throw ParameterError("availability_summary: missing baseline '" +
                         baseline_name + "'");
  const std::optional<double> base = base_it->second.drop_fraction;

  std::vector<AvailabilityDelta> rows;
  for (const auto& [variant, report] : reports) {
    AvailabilityDelta row;
    row.variant = variant;
    row.drop_fraction = report.drop_fraction;
    if (base && report.drop_fraction)
      row.delta_vs_baseline = *report.drop_fraction - *base;
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_availability_csv(const DelayTrace& delays,
                           const AvailabilityReport& report,
                           const std::filesystem::path& path,
                           const std::string& file_comment) {
  std::set<FrameRef> dropped(report.dropped_frames.begin(),
                             report.dropped_frames.end());
  std::ostringstream out;
  if (!file_comment.empty()) out << "# " << file_comment << "\n";
  out << "scene_id,frame_index,delay_ms,dropped\n";
  for (const DelayRecord& rec : delays) {
    const bool is_dropped = dropped.count({rec.scene_id, rec.frame_index}) > 0;
    out << rec.scene_id << ',' << rec.frame_index << ','
        << format_g9(rec.delay_ms) << ',' << (is_dropped ? 1 : 0) << "\n";
  }
  write_file_atomic(path, out.str());
}

void save_availability_json(const AvailabilityReport& report,
                            const std::filesystem::path& path,
                            const std::string& config_hash,
                            std::uint64_t seed) {
  nlohmann::json dropped = nlohmann::json::array();
  for (const FrameRef& f : report.dropped_frames)
    dropped.push_back({{"scene_id", f.scene_id}, {"frame_index", f.frame_index}});
  nlohmann::json j{{"config_hash", config_hash},
                   {"seed", seed},
                   {"threshold_ms", report.threshold_ms},
                   {"total_frames", report.total_frames},
                   {"dropped_count", report.dropped_frames.size()},
                   {"dropped_frames", dropped},
                   {"per_scene_fraction", report.per_scene_fraction}};
  if (report.drop_fraction)
    j["drop_fraction"] = *report.drop_fraction;
  else
    j["drop_fraction"] = nullptr;
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace lidarperf
