// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidarperf/config.hpp"

namespace lidarperf {

/// Per-frame detection output for one scene.
struct SceneDetections {
  LatencyTrace trace;
  std::vector<std::vector<Detection>> detections;  // per frame
};

/// Runs the surrogate detector over every frame of a scene. With
/// `measure_wall_clock` the trace records the wall-clock time of the
/// surrogate computation instead of the modeled latency; wall-clock values
/// are for smoke testing only and are not reproducible.
SceneDetections detect_scene(const Scene& scene, const DetectorParams& params,
                             bool measure_wall_clock = false);

/// Builds the per-(frame, obstacle) deviation map by matching detections
/// against the scene's (already adjusted) ground truth.
DeviationMap match_scene(const Scene& scene, const SceneDetections& dets,
                         double iou_threshold);

/// Writes one mutated variant directory per MutationSpec (mutated scenes
/// plus provenance). Validates everything before the first write.
nlohmann::json cmd_mutate(const RunConfig& config);

/// Full pipeline over baseline + variants: detect -> availability ->
/// trajectory -> stats; emits latency CSVs, availability reports, deviation
/// reports and a run summary. Returns the summary document.
nlohmann::json cmd_run(const RunConfig& config);

/// Queueing simulation of a preset/model; writes the metrics CSV and returns
/// the metrics as JSON.
nlohmann::json cmd_simulate(const qpn::PipelineModel& model,
                            qpn::QueueMode mode,
                            const std::filesystem::path& out_csv);

/// Renders a run summary (as produced by cmd_run) as a human-readable table.
std::string render_report(const nlohmann::json& summary);

/// Detections CSV: scene_id, frame_index, detection_index, box fields,
/// score, point_count.
void save_detections_csv(const Scene& scene, const SceneDetections& dets,
                         const std::filesystem::path& path,
                         const std::string& file_comment);

/// Reads a detections CSV (as written by cmd_run / `detect`) back into
/// per-frame detection lists for the given scene.
std::vector<std::vector<Detection>> load_detections_csv(
    const std::filesystem::path& path, const std::string& scene_id,
    std::size_t frame_count);

}  // namespace lidarperf
