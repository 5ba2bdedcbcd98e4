// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidarperf/scene.hpp"

namespace lidarperf {

enum class MutationKind { AddNoise, AddObstacles, MoveObstacles };

enum class MutationDirection { PlusY, MinusY, TowardCenter };

/// Configuration of one latency-stressing operator application.
struct MutationSpec {
  MutationKind kind = MutationKind::AddNoise;
  MutationDirection direction = MutationDirection::PlusY;
  double distance_m = 0.1;
  std::uint64_t seed = 0;

  /// Stable name used for variant directories and reports.
  std::string name() const;
};

std::string to_string(MutationKind kind);
std::string to_string(MutationDirection dir);
MutationKind mutation_kind_from_string(const std::string& s);
MutationDirection mutation_direction_from_string(const std::string& s);

/// One provenance record: what happened to which obstacle.
struct ProvenanceEntry {
  std::string obstacle_id;
  std::string op;          // "add_noise", "add_obstacles", "move_obstacles"
  std::string action;      // "noise_added", "duplicated", "skipped", "moved"
  double value = 0.0;      // points added / applied displacement, op-specific
  std::optional<ObstacleAnnotation> synthetic;  // duplicate box, if placed
};

/// Result of applying one operator to one frame.
struct MutationResult {
  PointCloudFrame mutated_frame;              // annotations already adjusted
  std::vector<ObstacleAnnotation> adjusted_annotations;
  std::map<std::string, std::size_t> points_added;
  std::vector<ProvenanceEntry> provenance;
};

/// Number of noise points for an obstacle of `num_obs` points and width
/// `width_obs` at noise distance `d_noise`: floor(num_obs * d_noise / width).
std::size_t noise_count(std::size_t num_obs, double d_noise, double width_obs);

/// Populates a d_noise x length strip adjacent to the chosen +/-y box face
/// with upsampled existing points, each jittered by N(0,1)*0.05 m per axis.
/// Ground truth is unchanged.
MutationResult add_noise(const PointCloudFrame& frame, const MutationSpec& spec);

/// Per-scene side choice for duplicated obstacles (+y preferred, -y
/// fallback), fixed the first time a placement succeeds and reused in every
/// later frame of the scene.
using DuplicationSides = std::map<std::string, MutationDirection>;

/// Duplicates each obstacle's points and box `distance_m` away along its
/// local +/-y axis; a duplicate is placed only where its footprint overlaps
/// no other box (zero BEV IoU). Duplicates get fresh synthetic ids and are
/// not part of the ground truth.
MutationResult add_obstacles(const PointCloudFrame& frame,
                             const MutationSpec& spec,
                             DuplicationSides& sides);

/// Shifts every obstacle (points and box) along world y toward the frame's
/// obstacle-point center of mass, clamped so no two footprints come within
/// 0.05 m of each other.
MutationResult move_obstacles(const PointCloudFrame& frame,
                              const MutationSpec& spec);

/// Scene-level provenance: per frame, the operator records.
struct SceneMutation {
  Scene scene;
  std::vector<std::vector<ProvenanceEntry>> provenance;  // per frame
};

/// Applies one operator across a whole scene (threading per-scene state such
/// as duplication sides) and re-validates the result.
SceneMutation mutate_scene(const Scene& scene, const MutationSpec& spec);

}  // namespace lidarperf
