// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lidarperf/geometry.hpp"

namespace lidarperf {

/// A ground-truth obstacle: a stable id, a category tag and its box.
struct ObstacleAnnotation {
  std::string obstacle_id;
  std::string category;
  BoundingBox3D box;
};

/// One LiDAR sweep with its ground-truth annotations (frame-indexed storage).
struct PointCloudFrame {
  std::string scene_id;
  std::size_t frame_index = 0;
  double timestamp_s = 0.0;
  std::vector<Point3D> points;
  std::vector<ObstacleAnnotation> annotations;
};

/// An ordered sequence of frames captured at a fixed sensor rate.
struct Scene {
  std::string scene_id;
  double frame_rate_hz = 0.0;
  std::vector<PointCloudFrame> frames;
};

/// Throws ValidationError if any frame invariant is violated (duplicate
/// annotation ids, non-finite points, intensity outside [0, 1], bad boxes).
void validate_frame(const PointCloudFrame& frame);

/// Throws ValidationError on bad scenes: frame_index not contiguous from 0,
/// timestamps not strictly increasing or inconsistent with frame_rate beyond
/// 1%, or any invalid frame.
void validate_scene(const Scene& scene);

/// Assigns every point to the annotated box containing it. A point inside
/// several boxes goes to the box whose center is nearest (ties broken by the
/// lexicographically smaller obstacle_id). Every annotated id is present in
/// the result, possibly with an empty point list.
std::map<std::string, std::vector<Point3D>> extract_obstacle_points(
    const PointCloudFrame& frame);

/// Per-point annotation index under the same assignment rule as
/// extract_obstacle_points; -1 for points outside every box.
std::vector<int> assign_points_to_obstacles(const PointCloudFrame& frame);

/// Scene directory I/O. A scene is a directory holding `manifest.json` plus
/// one `frame_NNNNNN.json` per frame; load(save(s)) == s bit-exact.
Scene load_scene(const std::filesystem::path& dir);
void save_scene(const Scene& scene, const std::filesystem::path& dir);

}  // namespace lidarperf
