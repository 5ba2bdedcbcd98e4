// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/mutate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/rng.hpp"

namespace lidarperf {

namespace {

constexpr double kJitterSigmaM = 0.05;      // per-axis noise scale
constexpr double kFaceBandM = 0.1;          // fallback source band thickness
constexpr double kMinSeparationM = 0.05;    // move clamp: footprint gap
constexpr double kMoveSubstepM = 0.0025;    // move integration resolution

const ObstacleAnnotation* find_annotation(const PointCloudFrame& frame,
                                          const std::string& id) {
  for (const auto& a : frame.annotations)
    if (a.obstacle_id == id) return &a;
  return nullptr;
}

}  // namespace

std::string to_string(MutationKind kind) {
  switch (kind) {
    case MutationKind::AddNoise: return "add_noise";
    case MutationKind::AddObstacles: return "add_obstacles";
    case MutationKind::MoveObstacles: return "move_obstacles";
  }
  return "unknown";
}

std::string to_string(MutationDirection dir) {
  switch (dir) {
    case MutationDirection::PlusY: return "+y";
    case MutationDirection::MinusY: return "-y";
    case MutationDirection::TowardCenter: return "toward-center";
  }
  return "unknown";
}

MutationKind mutation_kind_from_string(const std::string& s) {
  if (s == "add_noise") return MutationKind::AddNoise;
  if (s == "add_obstacles") return MutationKind::AddObstacles;
  if (s == "move_obstacles") return MutationKind::MoveObstacles;
  throw ParameterError("unknown mutation kind '" + s + "'");
}

MutationDirection mutation_direction_from_string(const std::string& s) {
  if (s == "+y") return MutationDirection::PlusY;
  if (s == "-y") return MutationDirection::MinusY;
  if (s == "toward-center") return MutationDirection::TowardCenter;
  throw ParameterError("unknown mutation direction '" + s + "'");
}

std::string MutationSpec::name() const {
  std::string n = to_string(kind) + "_d" + format_g9(distance_m);
  if (kind != MutationKind::MoveObstacles &&
      direction == MutationDirection::MinusY)
    n += "_neg";
  return n;
}

std::size_t noise_count(std::size_t num_obs, double d_noise, double width_obs) {
  if (!(width_obs > 0.0))
    throw ParameterError("noise_count: width_obs must be positive");
  if (!(d_noise > 0.0))
    throw ParameterError("noise_count: d_noise must be positive");
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(num_obs) * d_noise / width_obs));
}

MutationResult add_noise(const PointCloudFrame& frame,
                         const MutationSpec& spec) {
  if (spec.kind != MutationKind::AddNoise)
    throw ParameterError("add_noise: spec.kind mismatch");
  const double side =
      spec.direction == MutationDirection::MinusY ? -1.0 : 1.0;

  MutationResult result;
  result.mutated_frame = frame;
  result.adjusted_annotations = frame.annotations;

  const auto by_obstacle = extract_obstacle_points(frame);
  for (const auto& ann : frame.annotations) {
    const auto& own_points = by_obstacle.at(ann.obstacle_id);
    const std::size_t wanted =
        noise_count(own_points.size(), spec.distance_m, ann.box.width);
    result.points_added[ann.obstacle_id] = 0;
    if (wanted == 0 || own_points.empty()) {
      result.provenance.push_back(
          {ann.obstacle_id, "add_noise", "noise_added", 0.0, std::nullopt});
      continue;
    }

    const BoundingBox3D& box = ann.box;
    const double hw = 0.5 * box.width;
    // strip [hw, hw + d] (local y, signed side), full length and height
    auto in_strip = [&](const Point3D& p) {
      const Vec2 local = box.to_local(p.x, p.y);
      const double ly = side * local.y;
      return std::abs(local.x) <= 0.5 * box.length && ly >= hw &&
             ly <= hw + spec.distance_m &&
             std::abs(p.z - box.cz) <= 0.5 * box.height;
    };

    // prefer points already in the strip; otherwise borrow the 0.1 m band of
    // own points nearest the chosen face, shifted rigidly into the strip.
    // The band is anchored at the outermost point so an occluded face still
    // yields a nonempty source.
    std::vector<Point3D> source;
    for (const Point3D& p : frame.points)
      if (in_strip(p)) source.push_back(p);
    double shift_local_y = 0.0;
    if (source.empty()) {
      double outermost = -std::numeric_limits<double>::infinity();
      for (const Point3D& p : own_points)
        outermost = std::max(outermost, side * box.to_local(p.x, p.y).y);
      for (const Point3D& p : own_points) {
        if (side * box.to_local(p.x, p.y).y >= outermost - kFaceBandM)
          source.push_back(p);
      }
      // band center -> strip center
      shift_local_y =
          side * ((hw + 0.5 * spec.distance_m) - (outermost - 0.5 * kFaceBandM));
    }

    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const double shift_x = -s * shift_local_y;
    const double shift_y = c * shift_local_y;

    Rng rng(derive_seed(spec.seed, "add_noise", frame.scene_id,
                        frame.frame_index, fnv1a64(ann.obstacle_id)));
    for (std::size_t i = 0; i < wanted; ++i) {
      Point3D p = source[rng.below(source.size())];
      p.x += shift_x + rng.normal01() * kJitterSigmaM;
      p.y += shift_y + rng.normal01() * kJitterSigmaM;
      p.z += rng.normal01() * kJitterSigmaM;
      result.mutated_frame.points.push_back(p);
    }
    result.points_added[ann.obstacle_id] = wanted;
    result.provenance.push_back({ann.obstacle_id, "add_noise", "noise_added",
                                 static_cast<double>(wanted), std::nullopt});
  }
  return result;
}

MutationResult add_obstacles(const PointCloudFrame& frame,
                             const MutationSpec& spec,
                             DuplicationSides& sides) {
  if (spec.kind != MutationKind::AddObstacles)
    throw ParameterError("add_obstacles: spec.kind mismatch");

  MutationResult result;
  result.mutated_frame = frame;
  result.adjusted_annotations = frame.annotations;

  const auto by_obstacle = extract_obstacle_points(frame);

  std::vector<BoundingBox3D> occupied;
  occupied.reserve(frame.annotations.size());
  for (const auto& a : frame.annotations) occupied.push_back(a.box);

  auto collides = [&](const BoundingBox3D& candidate) {
    for (const auto& other : occupied)
      if (bev_iou(candidate, other) > 0.0) return true;
    return false;
  };

  auto translated = [](const ObstacleAnnotation& ann, double side,
                       double distance) {
    BoundingBox3D b = ann.box;
    const double c = std::cos(b.yaw), s = std::sin(b.yaw);
    b.cx += -s * side * distance;
    b.cy += c * side * distance;
    return b;
  };

  const MutationDirection preferred = spec.direction == MutationDirection::MinusY
                                          ? MutationDirection::MinusY
                                          : MutationDirection::PlusY;
  const MutationDirection fallback = preferred == MutationDirection::PlusY
                                         ? MutationDirection::MinusY
                                         : MutationDirection::PlusY;

  for (const auto& ann : frame.annotations) {
    std::optional<MutationDirection> chosen;
    const auto fixed = sides.find(ann.obstacle_id);
    if (fixed != sides.end()) {
      // side already pinned for this scene; only the collision check repeats
      const double sgn = fixed->second == MutationDirection::PlusY ? 1.0 : -1.0;
      if (!collides(translated(ann, sgn, spec.distance_m)))
        chosen = fixed->second;
    } else {
      for (MutationDirection dir : {preferred, fallback}) {
        const double sgn = dir == MutationDirection::PlusY ? 1.0 : -1.0;
        if (!collides(translated(ann, sgn, spec.distance_m))) {
          chosen = dir;
          sides[ann.obstacle_id] = dir;
          break;
        }
      }
    }

    if (!chosen) {
      result.provenance.push_back(
          {ann.obstacle_id, "add_obstacles", "skipped", 0.0, std::nullopt});
      result.points_added[ann.obstacle_id] = 0;
      continue;
    }

    const double sgn = *chosen == MutationDirection::PlusY ? 1.0 : -1.0;
    ObstacleAnnotation dup;
    dup.obstacle_id = ann.obstacle_id + "_dup";
    while (find_annotation(frame, dup.obstacle_id) != nullptr)
      dup.obstacle_id += "x";
    dup.category = ann.category;
    dup.box = translated(ann, sgn, spec.distance_m);

    const double c = std::cos(ann.box.yaw), s = std::sin(ann.box.yaw);
    const double dx = -s * sgn * spec.distance_m;
    const double dy = c * sgn * spec.distance_m;
    const auto& pts = by_obstacle.at(ann.obstacle_id);
    for (Point3D p : pts) {
      p.x += dx;
      p.y += dy;
      result.mutated_frame.points.push_back(p);
    }
    occupied.push_back(dup.box);
    result.points_added[ann.obstacle_id] = pts.size();
    result.provenance.push_back({ann.obstacle_id, "add_obstacles", "duplicated",
                                 static_cast<double>(pts.size()), dup});
  }
  return result;
}

MutationResult move_obstacles(const PointCloudFrame& frame,
                              const MutationSpec& spec) {
  if (spec.kind != MutationKind::MoveObstacles)
    throw ParameterError("move_obstacles: spec.kind mismatch");
  if (!(spec.distance_m > 0.0))
    throw ParameterError("move_obstacles: distance_m must be positive");

  MutationResult result;
  result.mutated_frame = frame;
  result.adjusted_annotations = frame.annotations;

  const auto by_obstacle = extract_obstacle_points(frame);

  double mass = 0.0, com_y = 0.0;
  for (const auto& [id, pts] : by_obstacle)
    for (const Point3D& p : pts) {
      com_y += p.y;
      mass += 1.0;
    }
  if (mass == 0.0 || frame.annotations.empty()) {
    for (const auto& ann : frame.annotations)
      result.provenance.push_back(
          {ann.obstacle_id, "move_obstacles", "moved", 0.0, std::nullopt});
    return result;
  }
  com_y /= mass;

  const std::size_t n = frame.annotations.size();
  std::vector<double> sign(n), remaining(n), desired(n), moved(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = com_y - frame.annotations[i].box.cy;
    sign[i] = dy > 0.0 ? 1.0 : (dy < 0.0 ? -1.0 : 0.0);
    desired[i] = std::min(spec.distance_m, std::abs(dy));
    if (desired[i] < 1e-12) {  // already at the center, up to rounding
      sign[i] = 0.0;
      desired[i] = 0.0;
    }
    remaining[i] = desired[i];
  }

  auto box_at = [&](std::size_t i) {
    BoundingBox3D b = frame.annotations[i].box;
    b.cy += sign[i] * moved[i];
    return b;
  };

  // simultaneous integration: every obstacle advances in small substeps so
  // head-on pairs split the available slack instead of the first in frame
  // order taking all of it
  const std::size_t substeps = static_cast<std::size_t>(
      std::ceil(spec.distance_m / kMoveSubstepM));
  for (std::size_t step = 0; step < substeps; ++step) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (remaining[i] <= 0.0 || sign[i] == 0.0) continue;
      const double delta = std::min(kMoveSubstepM, remaining[i]);
      BoundingBox3D candidate = box_at(i);
      candidate.cy += sign[i] * delta;
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j) {
        if (j == i) continue;
        ok = bev_distance(candidate, box_at(j)) >= kMinSeparationM;
      }
      if (ok) {
        moved[i] = desired[i] - (remaining[i] - delta);
        remaining[i] -= delta;
        any = true;
      }
    }
    if (!any) break;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double dy = sign[i] * moved[i];
    result.adjusted_annotations[i].box.cy += dy;
    result.provenance.push_back({frame.annotations[i].obstacle_id,
                                 "move_obstacles", "moved", dy, std::nullopt});
  }
  result.mutated_frame.annotations = result.adjusted_annotations;

  // translate each assigned point by exactly the displacement recorded for
  // its obstacle
  const std::vector<int> assignment = assign_points_to_obstacles(frame);
  std::vector<Point3D>& pts = result.mutated_frame.points;
  for (std::size_t pi = 0; pi < pts.size(); ++pi) {
    const int ai = assignment[pi];
    if (ai >= 0) pts[pi].y += sign[ai] * moved[ai];
  }
  return result;
}

SceneMutation mutate_scene(const Scene& scene, const MutationSpec& spec) {
  SceneMutation out;
  out.scene.scene_id = scene.scene_id;
  out.scene.frame_rate_hz = scene.frame_rate_hz;
  out.scene.frames.reserve(scene.frames.size());
  DuplicationSides sides;
  for (const PointCloudFrame& frame : scene.frames) {
    MutationResult r;
    switch (spec.kind) {
      case MutationKind::AddNoise:
        r = add_noise(frame, spec);
        break;
      case MutationKind::AddObstacles:
        r = add_obstacles(frame, spec, sides);
        break;
      case MutationKind::MoveObstacles:
        r = move_obstacles(frame, spec);
        break;
    }
    out.scene.frames.push_back(std::move(r.mutated_frame));
    out.provenance.push_back(std::move(r.provenance));
  }
  validate_scene(out.scene);
  return out;
}

}  // namespace lidarperf
