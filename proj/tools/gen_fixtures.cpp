// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the bundled fixture scenes. The committed fixtures/ directory
// was produced by this tool; a unit test guards against drift.

#include <iostream>
#include <string>

#include "lidarperf/fixtures.hpp"

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "fixtures";
  for (const std::string kind : {"urban", "sparse"}) {
    const lidarperf::Scene scene = lidarperf::make_fixture_scene(kind);
    lidarperf::save_scene(scene, out_dir + "/" + scene.scene_id);
    std::cout << scene.scene_id << ": " << scene.frames.size() << " frames, "
              << scene.frames.front().points.size() << " points/frame\n";
  }
  return 0;
}
