// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "lidarperf/geometry.hpp"
#include "lidarperf/rng.hpp"
#include "support/oracles.hpp"

using namespace lidarperf;

namespace {

BoundingBox3D box(double cx, double cy, double cz, double l, double w,
                  double h, double yaw) {
  return {cx, cy, cz, l, w, h, yaw};
}

BoundingBox3D random_box(Rng& rng) {
  return box(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0,
             rng.uniform(1.0, 5.0), rng.uniform(1.0, 4.0),
             rng.uniform(1.0, 3.0), rng.uniform(-kPi, kPi));
}

}  // namespace

TEST_CASE("normalize_yaw maps to (-pi, pi]") {
  CHECK(normalize_yaw(kPi) == doctest::Approx(kPi));
  CHECK(normalize_yaw(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_yaw(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(normalize_yaw(0.5) == doctest::Approx(0.5));
  CHECK(normalize_yaw(2.0 * kPi + 0.25) == doctest::Approx(0.25));
}

TEST_CASE("point_in_box basics") {
  const auto b = box(0, 0, 0, 2, 2, 2, 0);
  CHECK(point_in_box({0, 0, 0, 0}, b));
  CHECK_FALSE(point_in_box({1.01, 0, 0, 0}, b));
  // boundary is inclusive
  CHECK(point_in_box({1.0, 1.0, 1.0, 0}, b));
}

TEST_CASE("point_in_box with yaw pi/2") {
  // 4x2 footprint rotated a quarter turn: the long axis now runs along y
  const auto b = box(0, 0, 0, 4, 2, 2, kPi / 2);
  const Point3D p{0, 1.4, 0, 0};
  CHECK(point_in_box(p, b));
  // independent rotation-matrix check
  CHECK(oracles::point_in_rect_bev(p.x, p.y, b.cx, b.cy, b.length, b.width,
                                   b.yaw));
  CHECK_FALSE(point_in_box({1.4, 0, 0, 0}, b));
}

TEST_CASE("point_in_box invariant under joint rotation about the center") {
  Rng rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    const auto b = random_box(rng);
    const Point3D p{b.cx + rng.uniform(-4, 4), b.cy + rng.uniform(-4, 4),
                    b.cz + rng.uniform(-2, 2), 0.5};
    const double extra = rng.uniform(-kPi, kPi);
    // rotate both the point and the box by `extra` about the box center
    const double c = std::cos(extra), s = std::sin(extra);
    BoundingBox3D rotated = b;
    rotated.yaw = normalize_yaw(b.yaw + extra);
    const Point3D q{b.cx + c * (p.x - b.cx) - s * (p.y - b.cy),
                    b.cy + s * (p.x - b.cx) + c * (p.y - b.cy), p.z, 0.5};
    // points within 1e-9 of a face may legitimately flip on the inclusive
    // boundary under rotation rounding
    const Vec2 local = b.to_local(p.x, p.y);
    const double margin =
        std::min(std::abs(std::abs(local.x) - 0.5 * b.length),
                 std::abs(std::abs(local.y) - 0.5 * b.width));
    if (margin < 1e-9) continue;
    CHECK(point_in_box(p, b) == point_in_box(q, rotated));
  }
}

TEST_CASE("bev_iou trivial cases") {
  const auto a = box(0, 0, 0, 2, 2, 2, 0.3);
  CHECK(bev_iou(a, a) == doctest::Approx(1.0));
  const auto far = box(50, 50, 0, 2, 2, 2, 1.0);
  CHECK(bev_iou(a, far) == 0.0);
}

TEST_CASE("bev_iou hand geometry: 2x2 boxes offset by 1") {
  const auto a = box(0, 0, 0, 2, 2, 2, 0);
  const auto b = box(1, 0, 0, 2, 2, 2, 0);
  // intersection 1x2 = 2, union 4+4-2 = 6
  CHECK(bev_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const double mc = oracles::mc_bev_iou(a, b, 2000000, 99);
  CHECK(std::abs(bev_iou(a, b) - mc) < 1e-3);
}

TEST_CASE("bev_iou symmetry, range and rigid-transform invariance") {
  Rng rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    auto a = random_box(rng);
    auto b = random_box(rng);
    b.cx = a.cx + rng.uniform(-4, 4);
    b.cy = a.cy + rng.uniform(-4, 4);
    const double iou = bev_iou(a, b);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK(iou == doctest::Approx(bev_iou(b, a)).epsilon(1e-12));

    // rigid transform applied to both boxes
    const double dx = rng.uniform(-10, 10), dy = rng.uniform(-10, 10);
    const double rot = rng.uniform(-kPi, kPi);
    auto transform = [&](BoundingBox3D bx) {
      const double c = std::cos(rot), s = std::sin(rot);
      const double nx = c * bx.cx - s * bx.cy + dx;
      const double ny = s * bx.cx + c * bx.cy + dy;
      bx.cx = nx;
      bx.cy = ny;
      bx.yaw = normalize_yaw(bx.yaw + rot);
      return bx;
    };
    CHECK(bev_iou(transform(a), transform(b)) ==
          doctest::Approx(iou).epsilon(1e-9));
  }
}

TEST_CASE("bev_iou equals 1 only for equal footprints") {
  const auto a = box(0, 0, 0, 2, 2, 2, 0.4);
  auto b = a;
  b.cx += 0.01;
  CHECK(bev_iou(a, b) < 1.0);
}

TEST_CASE("bev_distance") {
  const auto a = box(0, 0, 0, 2, 2, 2, 0);
  CHECK(bev_distance(a, box(3, 0, 0, 2, 2, 2, 0)) == doctest::Approx(1.0));
  CHECK(bev_distance(a, box(1.5, 0, 0, 2, 2, 2, 0)) == 0.0);  // overlap
  // diagonal corner-to-corner gap
  const auto d = box(3, 3, 0, 2, 2, 2, 0);
  CHECK(bev_distance(a, d) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  // containment counts as overlap
  CHECK(bev_distance(a, box(0, 0, 0, 0.5, 0.5, 1, 0.2)) == 0.0);
}

TEST_CASE("polygon_area and convex_clip") {
  const std::vector<Vec2> unit{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(polygon_area(unit) == doctest::Approx(1.0));
  const std::vector<Vec2> shifted{{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}};
  const auto inter = convex_clip(unit, shifted);
  CHECK(polygon_area(inter) == doctest::Approx(0.5));
  const std::vector<Vec2> outside{{5, 5}, {6, 5}, {6, 6}, {5, 6}};
  CHECK(polygon_area(convex_clip(unit, outside)) == doctest::Approx(0.0));
}
