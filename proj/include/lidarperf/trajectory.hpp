// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lidarperf/availability.hpp"
#include "lidarperf/detect.hpp"
#include "lidarperf/scene.hpp"

namespace lidarperf {

/// One pose sample of an obstacle-indexed history (schema B).
struct HistorySample {
  std::size_t frame_index = 0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  bool present = true;
};

/// Obstacle-indexed storage: the frames in which one obstacle appears, with
/// contiguous frame indices from its first to its last annotated frame.
struct ObstacleHistory {
  std::string obstacle_id;
  std::string category;
  std::vector<HistorySample> samples;
};

struct TrajectoryPrediction {
  std::string obstacle_id;
  std::size_t horizon = 0;
  double step_dt_s = 0.0;
  std::vector<Vec2> waypoints;
};

struct PredictorParams {
  std::size_t horizon = 6;
  double step_dt_s = 0.5;
  std::size_t fit_window = 4;       // samples used for the velocity fit
  double moving_threshold_m = 1.0;  // GT displacement to count as moving
};

/// Frame-indexed GT (schema A) -> obstacle-indexed histories (schema B).
/// Samples where the obstacle is absent in the middle of its lifetime carry
/// present=false and hold the previous pose.
std::vector<ObstacleHistory> convert_schema(const Scene& scene);

/// Inverse of convert_schema for the present samples: per-frame sets of
/// (obstacle_id, pose). Used by the round-trip tests.
std::map<std::size_t, std::vector<std::pair<std::string, HistorySample>>>
regroup_by_frame(const std::vector<ObstacleHistory>& histories);

/// Detection outcome per (frame, obstacle): matched with a displacement, or
/// a status deviation (not detected).
struct FrameDeviation {
  bool detected = false;
  double dx = 0.0;
  double dy = 0.0;
};
using DeviationMap = std::map<std::pair<std::size_t, std::string>, FrameDeviation>;

/// Applies detection deviations to histories: undetected frames repeat the
/// previous frame's pose (or the first detected pose when the history starts
/// undetected); matched frames shift by the detection displacement.
std::vector<ObstacleHistory> transfer_deviations(
    const std::vector<ObstacleHistory>& histories,
    const DeviationMap& deviations);

/// Dropped frames copy the previous frame's values; an obstacle whose every
/// frame is dropped becomes stationary at its first pose. Idempotent for a
/// fixed drop set.
std::vector<ObstacleHistory> apply_frame_drops(
    const std::vector<ObstacleHistory>& histories,
    const std::set<std::size_t>& dropped_frames);

/// Constant-velocity surrogate predictor: velocity is the least-squares
/// slope over the last `fit_window` present samples (sample spacing
/// `history_dt_s`); waypoint i sits at last_pos + v * i * step_dt.
TrajectoryPrediction predict(const ObstacleHistory& history,
                             std::size_t horizon, double step_dt_s,
                             double history_dt_s, std::size_t fit_window = 4);

/// Mean and final Euclidean distance between two predictions of equal
/// horizon.
std::pair<double, double> ade_fde(const TrajectoryPrediction& a,
                                  const TrajectoryPrediction& b);

struct DeviationRecord {
  std::string obstacle_id;
  bool moving = false;
  double ade_m = 0.0;
  double fde_m = 0.0;
};

struct DeviationReport {
  std::vector<DeviationRecord> per_obstacle;
  std::optional<double> mean_ade_moving;  // empty when no obstacle moves
  std::optional<double> mean_fde_moving;
  std::size_t moving_count = 0;
};

/// Full per-scene evaluation: transfer the detection deviations, predict
/// with and without the dropped frames, and report per-obstacle ADE/FDE.
/// Aggregates cover moving obstacles only.
DeviationReport evaluate_scene(const Scene& scene,
                               const DeviationMap& deviations,
                               const std::set<std::size_t>& dropped_frames,
                               const PredictorParams& params);

/// CSV: obstacle_id, moving, ade_m, fde_m.
void save_deviation_csv(const DeviationReport& report,
                        const std::filesystem::path& path,
                        const std::string& file_comment);

}  // namespace lidarperf
