// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/fixtures.hpp"

#include <cmath>

#include "lidarperf/error.hpp"
#include "lidarperf/rng.hpp"

namespace lidarperf {

namespace {

struct Actor {
  std::string id;
  std::string category;
  double x0, y0, z0;
  double vx;
  double length, width, height;
  double yaw;
  std::size_t extra_points;  // loose interior returns on top of the lattice
  bool skirt;                // a few returns just outside the +y face
};

double round_mm(double v) { return std::round(v * 1000.0) / 1000.0; }

Scene build(const std::string& scene_id, std::size_t frame_count,
            const std::vector<Actor>& actors, std::uint64_t seed) {
  constexpr double kRate = 20.0;
  Scene scene;
  scene.scene_id = scene_id;
  scene.frame_rate_hz = kRate;

  for (std::size_t fi = 0; fi < frame_count; ++fi) {
    const double t = static_cast<double>(fi) / kRate;
    PointCloudFrame frame;
    frame.scene_id = scene_id;
    frame.frame_index = fi;
    frame.timestamp_s = t;

    for (std::size_t ai = 0; ai < actors.size(); ++ai) {
      const Actor& a = actors[ai];
      BoundingBox3D box;
      box.cx = a.x0 + a.vx * t;
      box.cy = a.y0;
      box.cz = a.z0;
      box.length = a.length;
      box.width = a.width;
      box.height = a.height;
      box.yaw = a.yaw;
      frame.annotations.push_back({a.id, a.category, box});

      Rng rng(derive_seed(seed, "fixture-points", scene_id, fi, ai));
      // jittered lattice over the footprint: neighbor gaps stay below
      // 1.85 * spacing = 0.47 m, so each obstacle reads as one BEV cluster
      const double span_x = 0.9 * a.length, span_y = 0.9 * a.width;
      const double spacing = std::min(0.25, span_y / 3.0);
      const double jitter = 0.3 * spacing;
      const int nx = std::max(2, static_cast<int>(span_x / spacing) + 1);
      const int ny = std::max(2, static_cast<int>(span_y / spacing) + 1);
      for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
          const double lx = std::clamp(
              -0.5 * span_x + span_x * ix / (nx - 1) +
                  rng.uniform(-jitter, jitter),
              -0.48 * a.length, 0.48 * a.length);
          const double ly = std::clamp(
              -0.5 * span_y + span_y * iy / (ny - 1) +
                  rng.uniform(-jitter, jitter),
              -0.48 * a.width, 0.48 * a.width);
          const double lz = rng.uniform(-0.45 * a.height, 0.45 * a.height);
          const Vec2 w = box.to_world(lx, ly);
          frame.points.push_back({round_mm(w.x), round_mm(w.y),
                                  round_mm(box.cz + lz),
                                  round_mm(rng.uniform(0.1, 0.9))});
        }
      }
      for (std::size_t p = 0; p < a.extra_points; ++p) {
        const double lx = rng.uniform(-0.45 * a.length, 0.45 * a.length);
        const double ly = rng.uniform(-0.45 * a.width, 0.45 * a.width);
        const double lz = rng.uniform(-0.45 * a.height, 0.45 * a.height);
        const Vec2 w = box.to_world(lx, ly);
        frame.points.push_back({round_mm(w.x), round_mm(w.y),
                                round_mm(box.cz + lz),
                                round_mm(rng.uniform(0.1, 0.9))});
      }
      if (a.skirt) {
        // fewer than min_points so a detached skirt never forms a cluster
        for (std::size_t p = 0; p < 4; ++p) {
          const double lx = rng.uniform(-0.4 * a.length, 0.4 * a.length);
          const double ly = 0.5 * a.width + rng.uniform(0.03, 0.28);
          const Vec2 w = box.to_world(lx, ly);
          frame.points.push_back({round_mm(w.x), round_mm(w.y),
                                  round_mm(box.cz),
                                  round_mm(rng.uniform(0.1, 0.9))});
        }
      }
    }

    // isolated static clutter, far from the lanes and from each other so it
    // never survives the min_points filter
    Rng bg(derive_seed(seed, "fixture-bg", scene_id, fi));
    for (const double row : {-18.0, -14.0, 14.0, 18.0}) {
      for (double x = -28.0; x <= 28.0; x += 4.0) {
        frame.points.push_back({round_mm(x + bg.uniform(-0.8, 0.8)),
                                round_mm(row + bg.uniform(-0.8, 0.8)),
                                round_mm(bg.uniform(-0.2, 0.6)),
                                round_mm(bg.uniform(0.05, 0.4))});
      }
    }
    scene.frames.push_back(std::move(frame));
  }
  validate_scene(scene);
  return scene;
}

}  // namespace

Scene make_fixture_scene(const std::string& kind, std::uint64_t seed) {
  if (kind == "urban") {
    const std::vector<Actor> actors = {
        {"car_00", "car", 6.0, -4.0, 0.0, 2.5, 4.08, 1.73, 1.55, 0.0, 12, true},
        {"car_01", "car", -8.0, -4.0, 0.0, 2.0, 4.08, 1.73, 1.55, 0.0, 12, false},
        {"car_02", "car", 0.0, 0.0, 0.0, 3.0, 4.08, 1.73, 1.55, 0.0, 12, true},
        {"car_03", "car", 12.0, 4.0, 0.0, -2.2, 4.08, 1.73, 1.55, 0.0, 12, false},
        {"car_04", "car", -6.0, 4.0, 0.0, 0.0, 4.08, 1.73, 1.55, -0.1, 12, true},
        {"truck_05", "truck", -14.0, 8.0, 0.4, 0.0, 6.5, 2.4, 2.8, 0.15, 20,
         false},
    };
    return build("fixture_urban", 16, actors, seed);
  }
  if (kind == "sparse") {
    const std::vector<Actor> actors = {
        {"car_10", "car", 4.0, -3.5, 0.0, 2.8, 4.08, 1.73, 1.55, 0.0, 12, true},
        {"car_11", "car", -9.0, -3.5, 0.0, 0.0, 4.08, 1.73, 1.55, 0.0, 12, false},
        {"ped_12", "pedestrian", 2.0, 3.5, 0.1, 0.0, 0.6, 0.6, 1.7, 0.0, 6,
         false},
        {"car_13", "car", -8.0, 3.5, 0.0, -2.4, 4.08, 1.73, 1.55, 0.0, 12, true},
    };
    return build("fixture_sparse", 10, actors, seed);
  }
  throw ParameterError("unknown fixture kind '" + kind + "'");
}

}  // namespace lidarperf
