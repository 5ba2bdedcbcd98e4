// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/scene.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"

namespace lidarperf {

using nlohmann::json;

void validate_frame(const PointCloudFrame& frame) {
  const std::string where =
      "scene '" + frame.scene_id + "' frame " + std::to_string(frame.frame_index);
  std::set<std::string> ids;
  for (const auto& ann : frame.annotations) {
    if (ann.obstacle_id.empty())
      throw ValidationError(where + ": annotation with empty obstacle_id");
    if (!ids.insert(ann.obstacle_id).second)
      throw ValidationError(where + ": duplicate obstacle_id '" +
                            ann.obstacle_id + "'");
    if (!ann.box.valid())
      throw ValidationError(where + ": invalid box for obstacle '" +
                            ann.obstacle_id + "'");
  }
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const Point3D& p = frame.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw ValidationError(where + ": non-finite coordinates at point " +
                            std::to_string(i));
    if (!(p.intensity >= 0.0 && p.intensity <= 1.0))
      throw ValidationError(where + ": intensity outside [0,1] at point " +
                            std::to_string(i));
  }
}

void validate_scene(const Scene& scene) {
  if (!(scene.frame_rate_hz > 0.0))
    throw ValidationError("scene '" + scene.scene_id +
                          "': frame_rate_hz must be positive");
  const double period = 1.0 / scene.frame_rate_hz;
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const PointCloudFrame& f = scene.frames[i];
    if (f.scene_id != scene.scene_id)
      throw ValidationError("scene '" + scene.scene_id + "': frame " +
                            std::to_string(i) + " carries scene_id '" +
                            f.scene_id + "'");
    if (f.frame_index != i)
      throw ValidationError("scene '" + scene.scene_id +
                            "': frame_index not contiguous at position " +
                            std::to_string(i) + " (got " +
                            std::to_string(f.frame_index) + ")");
    validate_frame(f);
    if (i > 0) {
      const double dt = f.timestamp_s - scene.frames[i - 1].timestamp_s;
      if (dt <= 0.0)
        throw ValidationError("scene '" + scene.scene_id +
                              "': timestamps not strictly increasing at frame " +
                              std::to_string(i));
      if (std::abs(dt - period) > 0.01 * period)
        throw ValidationError("scene '" + scene.scene_id +
                              "': inter-frame time " + format_g9(dt) +
                              "s deviates more than 1% from 1/frame_rate at frame " +
                              std::to_string(i));
    }
  }
}

std::vector<int> assign_points_to_obstacles(const PointCloudFrame& frame) {
  std::vector<int> assignment(frame.points.size(), -1);
  if (frame.annotations.empty()) return assignment;
  for (std::size_t pi = 0; pi < frame.points.size(); ++pi) {
    const Point3D& p = frame.points[pi];
    int best = -1;
    double best_d2 = 0.0;
    for (std::size_t ai = 0; ai < frame.annotations.size(); ++ai) {
      const ObstacleAnnotation& ann = frame.annotations[ai];
      if (!point_in_box(p, ann.box)) continue;
      const double dx = p.x - ann.box.cx;
      const double dy = p.y - ann.box.cy;
      const double dz = p.z - ann.box.cz;
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (best < 0 || d2 < best_d2 ||
          (d2 == best_d2 &&
           ann.obstacle_id < frame.annotations[best].obstacle_id)) {
        best = static_cast<int>(ai);
        best_d2 = d2;
      }
    }
    assignment[pi] = best;
  }
  return assignment;
}

std::map<std::string, std::vector<Point3D>> extract_obstacle_points(
    const PointCloudFrame& frame) {
  std::map<std::string, std::vector<Point3D>> out;
  for (const auto& ann : frame.annotations) out[ann.obstacle_id];
  const std::vector<int> assignment = assign_points_to_obstacles(frame);
  for (std::size_t pi = 0; pi < frame.points.size(); ++pi) {
    const int ai = assignment[pi];
    if (ai >= 0)
      out[frame.annotations[ai].obstacle_id].push_back(frame.points[pi]);
  }
  return out;
}

namespace {

std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.json", index);
  return buf;
}

json box_to_json(const BoundingBox3D& b) {
  return json{{"center", {b.cx, b.cy, b.cz}},
              {"size", {b.length, b.width, b.height}},
              {"yaw", b.yaw}};
}

BoundingBox3D box_from_json(const json& j) {
  BoundingBox3D b;
  b.cx = j.at("center").at(0).get<double>();
  b.cy = j.at("center").at(1).get<double>();
  b.cz = j.at("center").at(2).get<double>();
  b.length = j.at("size").at(0).get<double>();
  b.width = j.at("size").at(1).get<double>();
  b.height = j.at("size").at(2).get<double>();
  b.yaw = j.at("yaw").get<double>();
  return b;
}

json frame_to_json(const PointCloudFrame& f) {
  json pts;
  auto& xs = pts["x"] = json::array();
  auto& ys = pts["y"] = json::array();
  auto& zs = pts["z"] = json::array();
  auto& is = pts["intensity"] = json::array();
  for (const Point3D& p : f.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    zs.push_back(p.z);
    is.push_back(p.intensity);
  }
  json anns = json::array();
  for (const auto& a : f.annotations) {
    anns.push_back(json{{"obstacle_id", a.obstacle_id},
                        {"category", a.category},
                        {"box", box_to_json(a.box)}});
  }
  return json{{"frame_index", f.frame_index},
              {"timestamp_s", f.timestamp_s},
              {"points", pts},
              {"annotations", anns}};
}

PointCloudFrame frame_from_json(const json& j, const std::string& scene_id,
                                std::size_t expected_index) {
  PointCloudFrame f;
  f.scene_id = scene_id;
  try {
    f.frame_index = j.at("frame_index").get<std::size_t>();
    f.timestamp_s = j.at("timestamp_s").get<double>();
    const json& pts = j.at("points");
    const auto& xs = pts.at("x");
    const auto& ys = pts.at("y");
    const auto& zs = pts.at("z");
    const auto& is = pts.at("intensity");
    if (xs.size() != ys.size() || xs.size() != zs.size() ||
        xs.size() != is.size())
      throw ParseError("frame " + std::to_string(expected_index) +
                       ": point arrays have mismatched lengths");
    f.points.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      f.points.push_back({xs.at(i).get<double>(), ys.at(i).get<double>(),
                          zs.at(i).get<double>(), is.at(i).get<double>()});
    }
    for (const json& a : j.at("annotations")) {
      f.annotations.push_back({a.at("obstacle_id").get<std::string>(),
                               a.at("category").get<std::string>(),
                               box_from_json(a.at("box"))});
    }
  } catch (const json::exception& e) {
    throw ParseError("frame " + std::to_string(expected_index) +
                     ": " + e.what());
  }
  return f;
}

}  // namespace

Scene load_scene(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
  }
  Scene scene;
  std::size_t frame_count = 0;
  try {
    scene.scene_id = manifest.at("scene_id").get<std::string>();
    scene.frame_rate_hz = manifest.at("frame_rate_hz").get<double>();
    frame_count = manifest.at("frame_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
  }
  scene.frames.reserve(frame_count);
  for (std::size_t i = 0; i < frame_count; ++i) {
    const fs::path frame_path = dir / frame_file_name(i);
    json j;
    try {
      j = json::parse(read_file(frame_path));
    } catch (const json::exception& e) {
      throw ParseError("frame file " + frame_path.string() + ": " + e.what());
    }
    scene.frames.push_back(frame_from_json(j, scene.scene_id, i));
  }
  validate_scene(scene);
  return scene;
}

void save_scene(const Scene& scene, const std::filesystem::path& dir) {
  validate_scene(scene);
  std::filesystem::create_directories(dir);
  json manifest{{"scene_id", scene.scene_id},
                {"frame_rate_hz", scene.frame_rate_hz},
                {"frame_count", scene.frames.size()}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  for (const PointCloudFrame& f : scene.frames) {
    write_file_atomic(dir / frame_file_name(f.frame_index),
                      frame_to_json(f).dump() + "\n");
  }
}

}  // namespace lidarperf
