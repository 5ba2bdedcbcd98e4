// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/geometry.hpp"

#include <algorithm>
#include <limits>

namespace lidarperf {

double polygon_area(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    acc += cross(a, b);
  }
  return 0.5 * acc;
}

std::vector<Vec2> convex_clip(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clip) {
  std::vector<Vec2> output = subject;
  const std::size_t m = clip.size();
  for (std::size_t i = 0; i < m && !output.empty(); ++i) {
    const Vec2 a = clip[i];
    const Vec2 b = clip[(i + 1) % m];
    const Vec2 edge = b - a;
    std::vector<Vec2> input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 p = input[j];
      const Vec2 q = input[(j + 1) % n];
      const double side_p = cross(edge, p - a);
      const double side_q = cross(edge, q - a);
      if (side_p >= 0.0) {
        output.push_back(p);
        if (side_q < 0.0) {
          const double t = side_p / (side_p - side_q);
          output.push_back(p + t * (q - p));
        }
      } else if (side_q >= 0.0) {
        const double t = side_p / (side_p - side_q);
        output.push_back(p + t * (q - p));
      }
    }
  }
  return output;
}

double bev_iou(const BoundingBox3D& a, const BoundingBox3D& b) {
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  const std::vector<Vec2> pa(fa.begin(), fa.end());
  const std::vector<Vec2> pb(fb.begin(), fb.end());
  const double inter = polygon_area(convex_clip(pa, pb));
  const double area_a = a.length * a.width;
  const double area_b = b.length * b.width;
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

double segment_distance(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  auto point_segment = [](Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
  };
  // proper crossing => distance 0
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  if (((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0))) return 0.0;
  return std::min({point_segment(p1, q1, q2), point_segment(p2, q1, q2),
                   point_segment(q1, p1, p2), point_segment(q2, p1, p2)});
}

bool point_in_convex(Vec2 p, const std::array<Vec2, 4>& poly) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

}  // namespace

double bev_distance(const BoundingBox3D& a, const BoundingBox3D& b) {
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  if (point_in_convex(fa[0], fb) || point_in_convex(fb[0], fa)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, segment_distance(fa[i], fa[(i + 1) % 4], fb[j],
                                             fb[(j + 1) % 4]));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

}  // namespace lidarperf
