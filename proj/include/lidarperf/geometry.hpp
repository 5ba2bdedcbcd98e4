// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace lidarperf {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// One LiDAR return. Coordinates are ego-frame meters, intensity in [0, 1].
struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

/// Normalizes an angle to (-pi, pi].
inline double normalize_yaw(double yaw) {
  double y = std::fmod(yaw + kPi, 2.0 * kPi);
  if (y <= 0.0) y += 2.0 * kPi;
  return y - kPi;
}

/// Yaw-aware 3D box. `length` runs along the local x axis (heading), `width`
/// along local y, `height` along z.
struct BoundingBox3D {
  double cx = 0.0, cy = 0.0, cz = 0.0;
  double length = 0.0, width = 0.0, height = 0.0;
  double yaw = 0.0;

  bool valid() const {
    return length > 0.0 && width > 0.0 && height > 0.0 &&
           std::isfinite(cx) && std::isfinite(cy) && std::isfinite(cz) &&
           yaw > -kPi - 1e-12 && yaw <= kPi + 1e-12;
  }

  /// World point -> box-local frame (rotate by -yaw about the center).
  Vec2 to_local(double px, double py) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double dx = px - cx, dy = py - cy;
    return {c * dx + s * dy, -s * dx + c * dy};
  }

  /// Box-local point -> world frame.
  Vec2 to_world(double lx, double ly) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {cx + c * lx - s * ly, cy + s * lx + c * ly};
  }

  /// BEV footprint corners, counter-clockwise.
  std::array<Vec2, 4> footprint() const {
    const double hl = 0.5 * length, hw = 0.5 * width;
    return {to_world(hl, -hw), to_world(hl, hw), to_world(-hl, hw),
            to_world(-hl, -hw)};
  }
};

/// Boundary-inclusive containment test in the box-local frame.
inline bool point_in_box(const Point3D& p, const BoundingBox3D& box) {
  const Vec2 local = box.to_local(p.x, p.y);
  return std::abs(local.x) <= 0.5 * box.length &&
         std::abs(local.y) <= 0.5 * box.width &&
         std::abs(p.z - box.cz) <= 0.5 * box.height;
}

/// Signed polygon area (positive for counter-clockwise order).
double polygon_area(const std::vector<Vec2>& poly);

/// Intersection of two convex polygons (Sutherland-Hodgman), both CCW.
std::vector<Vec2> convex_clip(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clip);

/// BEV intersection-over-union of two yaw-aware boxes, in [0, 1].
double bev_iou(const BoundingBox3D& a, const BoundingBox3D& b);

/// Minimum BEV distance between two box footprints; 0 if they overlap.
double bev_distance(const BoundingBox3D& a, const BoundingBox3D& b);

}  // namespace lidarperf
