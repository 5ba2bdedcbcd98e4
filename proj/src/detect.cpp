// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/rng.hpp"

namespace lidarperf {

namespace {

constexpr double kDegenerateHeightM = 1.5;
constexpr double kMinBoxExtentM = 0.1;

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

bool point_less(const Point3D& a, const Point3D& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  if (a.z != b.z) return a.z < b.z;
  return a.intensity < b.intensity;
}

}  // namespace

LatencyModel latency_preset(const std::string& name) {
  if (name == "apollo-nuscenes") return {1000.0 / 10.5, 1.0, 0.005, 2.0};
  if (name == "autoware-awsim") return {1000.0 / 9.7, 1.5, 0.01, 2.0};
  throw ParameterError("unknown latency preset '" + name + "'");
}

std::vector<std::vector<Point3D>> cluster_points(
    const std::vector<Point3D>& points, double cluster_radius_m,
    std::size_t min_points) {
  if (!(cluster_radius_m > 0.0))
    throw ParameterError("cluster_points: radius must be positive");
  if (min_points < 1)
    throw ParameterError("cluster_points: min_points must be >= 1");
  const std::size_t n = points.size();
  if (n == 0) return {};

  // grid buckets of cell size = radius keep linking near-linear
  using Cell = std::pair<long long, long long>;
  std::map<Cell, std::vector<std::size_t>> grid;
  auto cell_of = [&](const Point3D& p) {
    return Cell{static_cast<long long>(std::floor(p.x / cluster_radius_m)),
                static_cast<long long>(std::floor(p.y / cluster_radius_m))};
  };
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(points[i])].push_back(i);

  UnionFind uf(n);
  const double r2 = cluster_radius_m * cluster_radius_m;
  for (std::size_t i = 0; i < n; ++i) {
    const Cell c = cell_of(points[i]);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({c.first + dx, c.second + dy});
        if (it == grid.end()) continue;
        for (const std::size_t j : it->second) {
          if (j <= i) continue;
          const double ddx = points[i].x - points[j].x;
          const double ddy = points[i].y - points[j].y;
          if (ddx * ddx + ddy * ddy <= r2) uf.unite(i, j);
        }
      }
    }
  }

  std::map<std::size_t, std::vector<Point3D>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(points[i]);

  std::vector<std::vector<Point3D>> clusters;
  for (auto& [root, members] : groups) {
    if (members.size() < min_points) continue;
    std::sort(members.begin(), members.end(), point_less);
    clusters.push_back(std::move(members));
  }
  // canonical order: by the lexicographically smallest member point
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) {
              return point_less(a.front(), b.front());
            });
  return clusters;
}

std::pair<std::vector<Detection>, double> detect(const PointCloudFrame& frame,
                                                 const DetectorParams& params) {
  const auto clusters =
      cluster_points(frame.points, params.cluster_radius_m, params.min_points);

  std::vector<Detection> detections;
  detections.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x, min_z = min_x, max_z = -min_x;
    for (const Point3D& p : cluster) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
      min_z = std::min(min_z, p.z);
      max_z = std::max(max_z, p.z);
    }
    Detection d;
    d.box.cx = 0.5 * (min_x + max_x);
    d.box.cy = 0.5 * (min_y + max_y);
    d.box.cz = 0.5 * (min_z + max_z);
    d.box.length = std::max(max_x - min_x, kMinBoxExtentM);
    d.box.width = std::max(max_y - min_y, kMinBoxExtentM);
    d.box.height = max_z - min_z;
    if (d.box.height < 1e-9) d.box.height = kDegenerateHeightM;
    d.box.yaw = 0.0;
    d.point_count = cluster.size();
    d.score = std::min(1.0, static_cast<double>(cluster.size()) / 100.0);
    detections.push_back(d);
  }

  const double mean = params.latency.mean_ms(detections.size());
  double latency = mean;
  if (params.latency.noise_sigma_ms > 0.0) {
    Rng rng(derive_seed(params.seed, "latency", frame.scene_id,
                        frame.frame_index));
    latency += rng.normal01() * params.latency.noise_sigma_ms;
  }
  latency = std::max(0.0, latency);
  return {std::move(detections), latency};
}

LatencyModel fit_latency_model(
    const std::vector<std::pair<std::size_t, double>>& samples, int degree) {
  if (degree != 1 && degree != 3)
    throw ParameterError("fit_latency_model: degree must be 1 or 3");
  std::set<std::size_t> distinct;
  for (const auto& [k, _] : samples) distinct.insert(k);
  const std::size_t terms = degree == 1 ? 2 : 3;
  if (distinct.size() < terms)
    throw FitError("fit_latency_model: need at least " +
                   std::to_string(terms) + " distinct detection counts, got " +
                   std::to_string(distinct.size()));

  // normal equations on columns [1, K] or [1, K, K^3]
  double ata[3][3] = {{0}};
  double atb[3] = {0};
  for (const auto& [k, y] : samples) {
    const double kd = static_cast<double>(k);
    const double cols[3] = {1.0, kd, kd * kd * kd};
    for (std::size_t i = 0; i < terms; ++i) {
      for (std::size_t j = 0; j < terms; ++j) ata[i][j] += cols[i] * cols[j];
      atb[i] += cols[i] * y;
    }
  }

  // Gaussian elimination with partial pivoting
  double a[3][4];
  for (std::size_t i = 0; i < terms; ++i) {
    for (std::size_t j = 0; j < terms; ++j) a[i][j] = ata[i][j];
    a[i][terms] = atb[i];
  }
  for (std::size_t col = 0; col < terms; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < terms; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12)
      throw FitError("fit_latency_model: rank-deficient design");
    if (pivot != col)
      for (std::size_t j = 0; j <= terms; ++j) std::swap(a[pivot][j], a[col][j]);
    for (std::size_t r = 0; r < terms; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= terms; ++j) a[r][j] -= f * a[col][j];
    }
  }
  double coef[3] = {0, 0, 0};
  for (std::size_t i = 0; i < terms; ++i) coef[i] = a[i][terms] / a[i][i];

  LatencyModel model;
  model.c0_ms = coef[0];
  model.c1_ms = coef[1];
  model.c3_ms = terms == 3 ? coef[2] : 0.0;

  double ssr = 0.0;
  for (const auto& [k, y] : samples) {
    const double r = y - model.mean_ms(k);
    ssr += r * r;
  }
  const double dof = static_cast<double>(samples.size()) -
                     static_cast<double>(terms);
  model.noise_sigma_ms = dof > 0.0 ? std::sqrt(ssr / dof) : 0.0;
  return model;
}

std::vector<MatchResult> match_detections(
    const std::vector<Detection>& detections,
    const std::vector<ObstacleAnnotation>& gt_boxes, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw ParameterError("match_detections: iou_threshold must be in (0,1]");

  struct Candidate {
    double iou;
    std::size_t gt;
    std::size_t det;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const double iou = bev_iou(gt_boxes[g].box, detections[d].box);
      if (iou >= iou_threshold) candidates.push_back({iou, g, d});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              if (a.gt != b.gt) return a.gt < b.gt;
              return a.det < b.det;
            });

  std::vector<MatchResult> results(gt_boxes.size());
  std::vector<bool> gt_used(gt_boxes.size(), false);
  std::vector<bool> det_used(detections.size(), false);
  for (std::size_t g = 0; g < gt_boxes.size(); ++g)
    results[g].gt_id = gt_boxes[g].obstacle_id;
  for (const Candidate& c : candidates) {
    if (gt_used[c.gt] || det_used[c.det]) continue;
    gt_used[c.gt] = true;
    det_used[c.det] = true;
    MatchResult& r = results[c.gt];
    r.detection_index = c.det;
    r.iou = c.iou;
    r.dx = detections[c.det].box.cx - gt_boxes[c.gt].box.cx;
    r.dy = detections[c.det].box.cy - gt_boxes[c.gt].box.cy;
  }
  return results;
}

void save_latency_trace(const LatencyTrace& trace,
                        const std::filesystem::path& path,
                        const std::string& file_comment) {
  std::ostringstream out;
  if (!file_comment.empty()) out << "# " << file_comment << "\n";
  out << "scene_id,frame_index,latency_ms,detection_count\n";
  for (const LatencyRecord& r : trace) {
    out << r.scene_id << ',' << r.frame_index << ',' << format_g9(r.latency_ms)
        << ',' << r.detection_count << "\n";
  }
  write_file_atomic(path, out.str());
}

LatencyTrace load_latency_trace(const std::filesystem::path& path) {
  LatencyTrace trace;
  for (const auto& row : read_csv_rows(path)) {
    if (row.size() != 4)
      throw ParseError("latency trace " + path.string() +
                       ": expected 4 columns");
    LatencyRecord r;
    r.scene_id = row[0];
    r.frame_index = static_cast<std::size_t>(std::stoull(row[1]));
    r.latency_ms = std::stod(row[2]);
    r.detection_count = static_cast<std::size_t>(std::stoull(row[3]));
    trace.push_back(std::move(r));
  }
  return trace;
}

}  // namespace lidarperf
