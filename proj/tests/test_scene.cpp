// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/rng.hpp"
#include "lidarperf/scene.hpp"

using namespace lidarperf;
namespace fs = std::filesystem;

namespace {

ObstacleAnnotation ann(const std::string& id, double cx, double cy, double cz,
                       double l, double w, double h, double yaw = 0.0) {
  return {id, "car", {cx, cy, cz, l, w, h, yaw}};
}

Scene random_scene(std::uint64_t seed, std::size_t frames = 4) {
  Rng rng(seed);
  Scene scene;
  scene.scene_id = "rand_" + std::to_string(seed);
  scene.frame_rate_hz = 10.0;
  for (std::size_t fi = 0; fi < frames; ++fi) {
    PointCloudFrame f;
    f.scene_id = scene.scene_id;
    f.frame_index = fi;
    f.timestamp_s = static_cast<double>(fi) / scene.frame_rate_hz;
    const std::size_t n_ann = 1 + rng.below(3);
    for (std::size_t a = 0; a < n_ann; ++a) {
      f.annotations.push_back(ann("obs_" + std::to_string(a),
                                  rng.uniform(-20, 20), rng.uniform(-20, 20),
                                  0.0, rng.uniform(1, 5), rng.uniform(1, 3),
                                  rng.uniform(1, 2), rng.uniform(-3.1, 3.1)));
    }
    const std::size_t n_pts = rng.below(200);
    for (std::size_t p = 0; p < n_pts; ++p) {
      f.points.push_back({rng.uniform(-25, 25), rng.uniform(-25, 25),
                          rng.uniform(-2, 2), rng.uniform01()});
    }
    scene.frames.push_back(std::move(f));
  }
  return scene;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lidarperf_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("extract_obstacle_points: box filled with 56 points") {
  PointCloudFrame frame;
  frame.scene_id = "s";
  Rng rng(56);
  frame.annotations.push_back(ann("car", 5, 5, 0, 4.08, 1.73, 1.55));
  for (int i = 0; i < 56; ++i) {
    frame.points.push_back({5 + rng.uniform(-1.9, 1.9),
                            5 + rng.uniform(-0.8, 0.8),
                            rng.uniform(-0.7, 0.7), 0.5});
  }
  // points clearly outside
  frame.points.push_back({20, 20, 0, 0.1});
  frame.points.push_back({-20, 5, 0, 0.1});
  const auto extracted = extract_obstacle_points(frame);
  REQUIRE(extracted.size() == 1);
  CHECK(extracted.at("car").size() == 56);
}

TEST_CASE("extract_obstacle_points: no annotations") {
  PointCloudFrame frame;
  frame.scene_id = "s";
  frame.points.push_back({0, 0, 0, 0});
  CHECK(extract_obstacle_points(frame).empty());
}

TEST_CASE("extract_obstacle_points: overlapping boxes use nearest center") {
  PointCloudFrame frame;
  frame.scene_id = "s";
  frame.annotations.push_back(ann("a", 0, 0, 0, 4, 4, 2));
  frame.annotations.push_back(ann("b", 3, 0, 0, 4, 4, 2));
  // inside both; nearer to b's center
  frame.points.push_back({1.9, 0, 0, 0.5});
  // inside both; nearer to a's center
  frame.points.push_back({1.1, 0, 0, 0.5});
  // equidistant: tie broken toward lexicographically smaller id
  frame.points.push_back({1.5, 0, 0, 0.5});
  const auto extracted = extract_obstacle_points(frame);
  CHECK(extracted.at("b").size() == 1);
  CHECK(extracted.at("a").size() == 2);
}

TEST_CASE("extract_obstacle_points partitions the in-box points") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scene scene = random_scene(seed, 2);
    for (const auto& frame : scene.frames) {
      const auto extracted = extract_obstacle_points(frame);
      std::size_t in_any = 0;
      for (const auto& p : frame.points) {
        bool inside = false;
        for (const auto& a : frame.annotations)
          if (point_in_box(p, a.box)) inside = true;
        if (inside) ++in_any;
      }
      std::size_t assigned = 0;
      for (const auto& [id, pts] : extracted) assigned += pts.size();
      CHECK(assigned == in_any);  // no point lost, none double-assigned
    }
  }
}

TEST_CASE("scene save/load round-trips bit-exact") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Scene scene = random_scene(seed);
    const fs::path dir = temp_dir("roundtrip");
    save_scene(scene, dir);
    const Scene loaded = load_scene(dir);
    REQUIRE(loaded.frames.size() == scene.frames.size());
    CHECK(loaded.scene_id == scene.scene_id);
    CHECK(loaded.frame_rate_hz == scene.frame_rate_hz);
    for (std::size_t fi = 0; fi < scene.frames.size(); ++fi) {
      const auto& a = scene.frames[fi];
      const auto& b = loaded.frames[fi];
      CHECK(a.timestamp_s == b.timestamp_s);
      REQUIRE(a.points.size() == b.points.size());
      for (std::size_t p = 0; p < a.points.size(); ++p) {
        CHECK(a.points[p].x == b.points[p].x);
        CHECK(a.points[p].y == b.points[p].y);
        CHECK(a.points[p].z == b.points[p].z);
        CHECK(a.points[p].intensity == b.points[p].intensity);
      }
      REQUIRE(a.annotations.size() == b.annotations.size());
      for (std::size_t k = 0; k < a.annotations.size(); ++k) {
        CHECK(a.annotations[k].obstacle_id == b.annotations[k].obstacle_id);
        CHECK(a.annotations[k].box.cx == b.annotations[k].box.cx);
        CHECK(a.annotations[k].box.yaw == b.annotations[k].box.yaw);
      }
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("empty scene is valid") {
  Scene scene;
  scene.scene_id = "empty";
  scene.frame_rate_hz = 20.0;
  const fs::path dir = temp_dir("empty");
  save_scene(scene, dir);
  const Scene loaded = load_scene(dir);
  CHECK(loaded.frames.empty());
  fs::remove_all(dir);
}

TEST_CASE("non-contiguous frame_index fails validation") {
  Scene scene = random_scene(3);
  scene.frames[1].frame_index = 5;
  CHECK_THROWS_AS(validate_scene(scene), ValidationError);
}

TEST_CASE("timestamps inconsistent with frame rate fail validation") {
  Scene scene = random_scene(4);
  scene.frames[2].timestamp_s += 0.03;  // 30% off a 100 ms period
  CHECK_THROWS_AS(validate_scene(scene), ValidationError);
}

TEST_CASE("duplicate annotation ids fail validation") {
  Scene scene = random_scene(5);
  auto& anns = scene.frames[0].annotations;
  anns.push_back(anns.front());
  CHECK_THROWS_AS(validate_scene(scene), ValidationError);
}

TEST_CASE("intensity outside [0,1] fails validation") {
  Scene scene = random_scene(6);
  scene.frames[0].points.push_back({0, 0, 0, 1.5});
  CHECK_THROWS_AS(validate_scene(scene), ValidationError);
}

TEST_CASE("malformed frame file raises ParseError naming the frame") {
  const Scene scene = random_scene(7, 2);
  const fs::path dir = temp_dir("malformed");
  save_scene(scene, dir);
  {
    std::ofstream out(dir / "frame_000001.json", std::ios::trunc);
    out << "{\"frame_index\": 1, \"timestamp_s\": 0.1, \"points\": {}}";
  }
  try {
    load_scene(dir);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing scene directory raises ParseError") {
  CHECK_THROWS_AS(load_scene("/nonexistent/path"), ParseError);
}
