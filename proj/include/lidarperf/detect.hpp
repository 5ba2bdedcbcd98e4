// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lidarperf/scene.hpp"

namespace lidarperf {

/// One detected obstacle candidate.
struct Detection {
  BoundingBox3D box;
  double score = 0.0;
  std::size_t point_count = 0;
};

/// Detection-count -> latency regression: c0 + c1*K + c3*K^3 plus Gaussian
/// noise, clamped at zero.
struct LatencyModel {
  double c0_ms = 0.0;
  double c1_ms = 0.0;
  double c3_ms = 0.0;
  double noise_sigma_ms = 0.0;

  double mean_ms(std::size_t detections) const {
    const double k = static_cast<double>(detections);
    return c0_ms + c1_ms * k + c3_ms * k * k * k;
  }
};

/// Named latency presets anchored to measured operating points.
/// "apollo-nuscenes": ~95 ms at zero detections, ~116 ms at the mean
/// operating point (12 detections). "autoware-awsim": ~103 ms at zero,
/// ~128 ms at 10 detections.
LatencyModel latency_preset(const std::string& name);

struct DetectorParams {
  double cluster_radius_m = 0.5;
  std::size_t min_points = 5;
  double iou_threshold = 0.5;
  LatencyModel latency;
  std::uint64_t seed = 0;
};

/// One per-frame latency record.
struct LatencyRecord {
  std::string scene_id;
  std::size_t frame_index = 0;
  double latency_ms = 0.0;
  std::size_t detection_count = 0;
};

using LatencyTrace = std::vector<LatencyRecord>;

/// Single-linkage Euclidean clustering in the BEV plane: points link when
/// their (x, y) distance is <= radius; clusters smaller than min_points are
/// discarded. The result is a canonical, point-order-independent partition.
std::vector<std::vector<Point3D>> cluster_points(
    const std::vector<Point3D>& points, double cluster_radius_m,
    std::size_t min_points);

/// Surrogate detector: clusters -> axis-aligned tight boxes, score
/// min(1, points/100), modeled latency from the detection count.
std::pair<std::vector<Detection>, double> detect(const PointCloudFrame& frame,
                                                 const DetectorParams& params);

/// Least-squares fit of the latency model. degree 1 fits (c0, c1) and forces
/// c3 = 0; degree 3 fits (c0, c1, c3). Throws FitError when the design is
/// rank-deficient (needs degree+1 distinct detection counts).
LatencyModel fit_latency_model(
    const std::vector<std::pair<std::size_t, double>>& samples, int degree);

/// Outcome of matching one ground-truth obstacle against the detections.
struct MatchResult {
  std::string gt_id;
  std::optional<std::size_t> detection_index;  // nullopt = status deviation
  double iou = 0.0;
  double dx = 0.0;  // detection center minus GT center
  double dy = 0.0;
};

/// Greedy one-to-one matching in descending BEV IoU order; results are in
/// ground-truth order.
std::vector<MatchResult> match_detections(
    const std::vector<Detection>& detections,
    const std::vector<ObstacleAnnotation>& gt_boxes, double iou_threshold);

/// LatencyTrace CSV: scene_id, frame_index, latency_ms, detection_count.
void save_latency_trace(const LatencyTrace& trace,
                        const std::filesystem::path& path,
                        const std::string& file_comment);
LatencyTrace load_latency_trace(const std::filesystem::path& path);

}  // namespace lidarperf
