// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"

namespace lidarperf {

std::vector<ObstacleHistory> convert_schema(const Scene& scene) {
  struct Span {
    std::size_t first = 0, last = 0;
    std::string category;
  };
  std::map<std::string, Span> spans;
  for (const PointCloudFrame& f : scene.frames) {
    for (const ObstacleAnnotation& ann : f.annotations) {
      auto [it, inserted] = spans.try_emplace(
          ann.obstacle_id, Span{f.frame_index, f.frame_index, ann.category});
      if (!inserted) it->second.last = f.frame_index;
    }
  }

  std::vector<ObstacleHistory> histories;
  histories.reserve(spans.size());
  for (const auto& [id, span] : spans) {
    ObstacleHistory h;
    h.obstacle_id = id;
    h.category = span.category;
    HistorySample prev;
    for (std::size_t fi = span.first; fi <= span.last; ++fi) {
      const PointCloudFrame& frame = scene.frames[fi];
      const ObstacleAnnotation* ann = nullptr;
      for (const auto& a : frame.annotations)
        if (a.obstacle_id == id) ann = &a;
      HistorySample s;
      s.frame_index = fi;
      if (ann != nullptr) {
        s.x = ann->box.cx;
        s.y = ann->box.cy;
        s.yaw = ann->box.yaw;
        s.present = true;
      } else {
        s = prev;  // hold the previous pose, flagged absent
        s.frame_index = fi;
        s.present = false;
      }
      h.samples.push_back(s);
      prev = s;
    }
    histories.push_back(std::move(h));
  }
  return histories;
}

std::map<std::size_t, std::vector<std::pair<std::string, HistorySample>>>
regroup_by_frame(const std::vector<ObstacleHistory>& histories) {
  std::map<std::size_t, std::vector<std::pair<std::string, HistorySample>>> out;
  for (const ObstacleHistory& h : histories)
    for (const HistorySample& s : h.samples)
      if (s.present) out[s.frame_index].push_back({h.obstacle_id, s});
  return out;
}

std::vector<ObstacleHistory> transfer_deviations(
    const std::vector<ObstacleHistory>& histories,
    const DeviationMap& deviations) {
  std::vector<ObstacleHistory> out = histories;
  for (ObstacleHistory& h : out) {
    // pass 1: shift matched samples by their displacement
    std::vector<bool> detected(h.samples.size(), false);
    for (std::size_t i = 0; i < h.samples.size(); ++i) {
      HistorySample& s = h.samples[i];
      if (!s.present) continue;
      const auto it = deviations.find({s.frame_index, h.obstacle_id});
      if (it == deviations.end()) continue;
      if (it->second.detected) {
        detected[i] = true;
        s.x += it->second.dx;
        s.y += it->second.dy;
      }
    }
    // pass 2: undetected present samples repeat the previous pose; a leading
    // undetected block repeats forward from the first detected sample
    std::optional<std::size_t> first_detected;
    for (std::size_t i = 0; i < h.samples.size(); ++i)
      if (detected[i]) {
        first_detected = i;
        break;
      }
    if (!first_detected) continue;  // never detected: leave the history as-is
    for (std::size_t i = 0; i < h.samples.size(); ++i) {
      HistorySample& s = h.samples[i];
      if (!s.present || detected[i]) continue;
      const HistorySample& src =
          i == 0 ? h.samples[*first_detected]
                 : (i < *first_detected ? h.samples[*first_detected]
                                        : h.samples[i - 1]);
      s.x = src.x;
      s.y = src.y;
      s.yaw = src.yaw;
    }
  }
  return out;
}

std::vector<ObstacleHistory> apply_frame_drops(
    const std::vector<ObstacleHistory>& histories,
    const std::set<std::size_t>& dropped_frames) {
  std::vector<ObstacleHistory> out = histories;
  for (ObstacleHistory& h : out) {
    if (h.samples.empty()) continue;
    const bool all_dropped = std::all_of(
        h.samples.begin(), h.samples.end(), [&](const HistorySample& s) {
          return dropped_frames.count(s.frame_index) > 0;
        });
    if (all_dropped) {
      // the obstacle is rendered stationary at its first pose
      const HistorySample first = h.samples.front();
      for (HistorySample& s : h.samples) {
        s.x = first.x;
        s.y = first.y;
        s.yaw = first.yaw;
      }
      continue;
    }
    for (std::size_t i = 0; i < h.samples.size(); ++i) {
      if (dropped_frames.count(h.samples[i].frame_index) == 0) continue;
      if (i == 0) continue;  // no previous frame to repeat
      h.samples[i].x = h.samples[i - 1].x;
      h.samples[i].y = h.samples[i - 1].y;
      h.samples[i].yaw = h.samples[i - 1].yaw;
    }
  }
  return out;
}

TrajectoryPrediction predict(const ObstacleHistory& history,
                             std::size_t horizon, double step_dt_s,
                             double history_dt_s, std::size_t fit_window) {
  if (horizon < 1) throw ParameterError("predict: horizon must be >= 1");
  if (!(step_dt_s > 0.0) || !(history_dt_s > 0.0))
    throw ParameterError("predict: time steps must be positive");

  std::vector<const HistorySample*> avail;
  for (const HistorySample& s : history.samples)
    if (s.present) avail.push_back(&s);
  if (avail.empty())
    throw ParameterError("predict: history '" + history.obstacle_id +
                         "' has no present samples");

  const std::size_t n = std::min(fit_window, avail.size());
  const std::size_t begin = avail.size() - n;

  double vx = 0.0, vy = 0.0;
  if (n >= 2) {
    double t_mean = 0.0, x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = begin; i < avail.size(); ++i) {
      t_mean += static_cast<double>(avail[i]->frame_index) * history_dt_s;
      x_mean += avail[i]->x;
      y_mean += avail[i]->y;
    }
    const double dn = static_cast<double>(n);
    t_mean /= dn;
    x_mean /= dn;
    y_mean /= dn;
    double stt = 0.0, stx = 0.0, sty = 0.0;
    for (std::size_t i = begin; i < avail.size(); ++i) {
      const double dt =
          static_cast<double>(avail[i]->frame_index) * history_dt_s - t_mean;
      stt += dt * dt;
      stx += dt * (avail[i]->x - x_mean);
      sty += dt * (avail[i]->y - y_mean);
    }
    if (stt > 0.0) {
      vx = stx / stt;
      vy = sty / stt;
    }
  }

  const HistorySample& last = *avail.back();
  TrajectoryPrediction pred;
  pred.obstacle_id = history.obstacle_id;
  pred.horizon = horizon;
  pred.step_dt_s = step_dt_s;
  pred.waypoints.reserve(horizon);
  for (std::size_t i = 1; i <= horizon; ++i) {
    const double t = static_cast<double>(i) * step_dt_s;
    pred.waypoints.push_back({last.x + vx * t, last.y + vy * t});
  }
  return pred;
}

std::pair<double, double> ade_fde(const TrajectoryPrediction& a,
                                  const TrajectoryPrediction& b) {
  if (a.horizon != b.horizon || a.waypoints.size() != b.waypoints.size())
    throw ParameterError("ade_fde: horizon mismatch");
  if (a.waypoints.empty()) throw ParameterError("ade_fde: empty predictions");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.waypoints.size(); ++i)
    sum += norm(a.waypoints[i] - b.waypoints[i]);
  const double fde = norm(a.waypoints.back() - b.waypoints.back());
  return {sum / static_cast<double>(a.waypoints.size()), fde};
}

DeviationReport evaluate_scene(const Scene& scene,
                               const DeviationMap& deviations,
                               const std::set<std::size_t>& dropped_frames,
                               const PredictorParams& params) {
  const double history_dt = 1.0 / scene.frame_rate_hz;

  // moving flag from the original ground truth
  std::map<std::string, std::pair<Vec2, Vec2>> gt_span;  // first/last center
  for (const PointCloudFrame& f : scene.frames) {
    for (const ObstacleAnnotation& ann : f.annotations) {
      const Vec2 c{ann.box.cx, ann.box.cy};
      auto [it, inserted] = gt_span.try_emplace(ann.obstacle_id,
                                                std::make_pair(c, c));
      if (!inserted) it->second.second = c;
    }
  }

  const auto histories = convert_schema(scene);
  const auto adjusted = transfer_deviations(histories, deviations);
  const auto dropped = apply_frame_drops(adjusted, dropped_frames);

  DeviationReport report;
  double ade_sum = 0.0, fde_sum = 0.0;
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    const auto pred_full = predict(adjusted[i], params.horizon,
                                   params.step_dt_s, history_dt,
                                   params.fit_window);
    const auto pred_drop = predict(dropped[i], params.horizon,
                                   params.step_dt_s, history_dt,
                                   params.fit_window);
    const auto [ade, fde] = ade_fde(pred_full, pred_drop);

    DeviationRecord rec;
    rec.obstacle_id = adjusted[i].obstacle_id;
    const auto& span = gt_span.at(rec.obstacle_id);
    rec.moving = norm(span.second - span.first) >= params.moving_threshold_m;
    rec.ade_m = ade;
    rec.fde_m = fde;
    if (rec.moving) {
      report.moving_count += 1;
      ade_sum += ade;
      fde_sum += fde;
    }
    report.per_obstacle.push_back(std::move(rec));
  }
  if (report.moving_count > 0) {
    report.mean_ade_moving = ade_sum / static_cast<double>(report.moving_count);
    report.mean_fde_moving = fde_sum / static_cast<double>(report.moving_count);
  }
  return report;
}

void save_deviation_csv(const DeviationReport& report,
                        const std::filesystem::path& path,
                        const std::string& file_comment) {
  std::ostringstream out;
  if (!file_comment.empty()) out << "# " << file_comment << "\n";
  out << "obstacle_id,moving,ade_m,fde_m\n";
  for (const DeviationRecord& r : report.per_obstacle) {
    out << r.obstacle_id << ',' << (r.moving ? 1 : 0) << ','
        << format_g9(r.ade_m) << ',' << format_g9(r.fde_m) << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace lidarperf
