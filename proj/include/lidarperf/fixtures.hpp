// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "lidarperf/scene.hpp"

namespace lidarperf {

/// Deterministic synthetic scenes bundled with the repository so every run
/// and test is network-free. "urban": 6 obstacles (4 moving), 16 frames.
/// "sparse": 4 obstacles (2 moving), 10 frames. Both 20 Hz, obstacle point
/// clouds sampled inside the annotation boxes, sparse isolated background
/// returns, and a few near-face returns outside half the boxes.
Scene make_fixture_scene(const std::string& kind, std::uint64_t seed = 7);

}  // namespace lidarperf
