// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/rng.hpp"

namespace lidarperf {

using nlohmann::json;

SceneDetections detect_scene(const Scene& scene, const DetectorParams& params,
                             bool measure_wall_clock) {
  SceneDetections out;
  out.trace.reserve(scene.frames.size());
  out.detections.reserve(scene.frames.size());
  for (const PointCloudFrame& frame : scene.frames) {
    const auto start = std::chrono::steady_clock::now();
    auto [dets, latency] = detect(frame, params);
    if (measure_wall_clock) {
      latency = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    }
    out.trace.push_back(
        {scene.scene_id, frame.frame_index, latency, dets.size()});
    out.detections.push_back(std::move(dets));
  }
  return out;
}

DeviationMap match_scene(const Scene& scene, const SceneDetections& dets,
                         double iou_threshold) {
  DeviationMap map;
  for (std::size_t fi = 0; fi < scene.frames.size(); ++fi) {
    const auto results = match_detections(dets.detections[fi],
                                          scene.frames[fi].annotations,
                                          iou_threshold);
    for (const MatchResult& r : results) {
      FrameDeviation dev;
      dev.detected = r.detection_index.has_value();
      dev.dx = r.dx;
      dev.dy = r.dy;
      map[{fi, r.gt_id}] = dev;
    }
  }
  return map;
}

namespace {

struct Variant {
  std::string name;
  std::optional<MutationSpec> spec;
};

std::vector<Variant> make_variants(const RunConfig& config) {
  std::vector<Variant> variants;
  variants.push_back({"baseline", std::nullopt});
  for (const MutationSpec& spec : config.mutations)
    variants.push_back({spec.name(), spec});
  return variants;
}

json provenance_to_json(const std::vector<std::vector<ProvenanceEntry>>& prov) {
  json frames = json::array();
  for (const auto& frame_entries : prov) {
    json entries = json::array();
    for (const ProvenanceEntry& e : frame_entries) {
      json entry{{"obstacle_id", e.obstacle_id},
                 {"op", e.op},
                 {"action", e.action},
                 {"value", e.value}};
      if (e.synthetic) {
        entry["synthetic"] = {
            {"obstacle_id", e.synthetic->obstacle_id},
            {"category", e.synthetic->category},
            {"center",
             {e.synthetic->box.cx, e.synthetic->box.cy, e.synthetic->box.cz}},
            {"size",
             {e.synthetic->box.length, e.synthetic->box.width,
              e.synthetic->box.height}},
            {"yaw", e.synthetic->box.yaw}};
      }
      entries.push_back(std::move(entry));
    }
    frames.push_back(std::move(entries));
  }
  return frames;
}

double mean_latency(const LatencyTrace& trace) {
  if (trace.empty()) return 0.0;
  double sum = 0.0;
  for (const LatencyRecord& r : trace) sum += r.latency_ms;
  return sum / static_cast<double>(trace.size());
}

json stats_block(const std::vector<double>& baseline,
                 const std::vector<double>& variant,
                 stats::Alternative alternative) {
  json out;
  try {
    const auto w = stats::wilcoxon_signed_rank({baseline, variant}, alternative);
    out["p_value"] = w.p_value;
    out["z"] = w.z;
    out["effect_r"] = w.effect_r;
    out["n_nonzero"] = w.n_used;
    out["exact"] = w.exact;
  } catch (const DegenerateSampleError&) {
    out["degenerate"] = true;
  }
  if (!baseline.empty() && !variant.empty()) {
    const auto cd = stats::cliffs_delta(baseline, variant);
    out["cliffs_delta"] = cd.delta;
    out["magnitude"] = stats::to_string(cd.magnitude);
  }
  return out;
}

}  // namespace

json cmd_mutate(const RunConfig& config) {
  check_paths_exist(config);
  if (config.mutations.empty())
    throw ValidationError("cmd_mutate: config lists no mutations");
  std::vector<Scene> scenes;
  for (const auto& path : config.scene_paths) scenes.push_back(load_scene(path));

  const std::string hash = config_hash(config);
  const std::filesystem::path root = config.output_dir;
  json summary{{"config_hash", hash}, {"seed", config.seed}};
  json variants = json::array();
  for (const MutationSpec& spec : config.mutations) {
    const std::string name = spec.name();
    const std::filesystem::path vdir = root / "variants" / name;
    json prov_doc{{"config_hash", hash}, {"seed", config.seed},
                  {"variant", name}};
    json scenes_json = json::object();
    for (const Scene& scene : scenes) {
      const SceneMutation sm = mutate_scene(scene, spec);
      save_scene(sm.scene, vdir / "scenes" / scene.scene_id);
      scenes_json[scene.scene_id] = provenance_to_json(sm.provenance);
    }
    prov_doc["provenance"] = scenes_json;
    write_file_atomic(vdir / "provenance.json", prov_doc.dump(2) + "\n");
    variants.push_back(name);
  }
  summary["variants"] = variants;
  return summary;
}

json cmd_run(const RunConfig& config) {
  check_paths_exist(config);
  std::vector<Scene> scenes;
  for (const auto& path : config.scene_paths) scenes.push_back(load_scene(path));

  const std::string hash = config_hash(config);
  const std::string comment =
      "config_hash=" + hash + " seed=" + std::to_string(config.seed);
  const std::filesystem::path root = config.output_dir;
  std::filesystem::create_directories(root);
  write_file_atomic(root / "run_config.json", run_config_to_json(config));

  const std::vector<Variant> variants = make_variants(config);

  struct VariantOutcome {
    LatencyTrace trace;
    AvailabilityReport availability;
    std::map<std::string, DeviationReport> deviations;  // per scene
  };
  std::map<std::string, VariantOutcome> outcomes;

  for (const Variant& variant : variants) {
    const std::filesystem::path vdir = root / variant.name;
    VariantOutcome outcome;

    std::map<std::string, std::set<std::size_t>> dropped_by_scene;
    DelayTrace all_delays;
    std::map<std::string, std::pair<Scene, DeviationMap>> prepared;

    for (const Scene& original : scenes) {
      Scene scene = original;
      if (variant.spec) {
        SceneMutation sm = mutate_scene(original, *variant.spec);
        scene = std::move(sm.scene);
        json prov{{"config_hash", hash},
                  {"seed", config.seed},
                  {"variant", variant.name},
                  {"scene_id", scene.scene_id},
                  {"provenance", provenance_to_json(sm.provenance)}};
        write_file_atomic(vdir / ("provenance_" + scene.scene_id + ".json"),
                          prov.dump(2) + "\n");
      }
      const SceneDetections dets = detect_scene(scene, config.detector);
      const DeviationMap devmap =
          match_scene(scene, dets, config.detector.iou_threshold);
      const std::string scene_id = scene.scene_id;
      save_detections_csv(scene, dets,
                          vdir / ("detections_" + scene_id + ".csv"), comment);
      outcome.trace.insert(outcome.trace.end(), dets.trace.begin(),
                           dets.trace.end());
      prepared.emplace(scene_id, std::make_pair(std::move(scene), devmap));
    }

    save_latency_trace(outcome.trace, vdir / "latency.csv", comment);

    const DelayTrace delays =
        compute_delays(outcome.trace, config.sensor_rate_hz);
    outcome.availability = compute_dropped_frames(delays, config.threshold_ms());
    save_availability_csv(delays, outcome.availability,
                          vdir / "availability.csv", comment);
    save_availability_json(outcome.availability, vdir / "availability.json",
                           hash, config.seed);
    for (const FrameRef& f : outcome.availability.dropped_frames)
      dropped_by_scene[f.scene_id].insert(f.frame_index);

    for (const auto& [scene_id, pair] : prepared) {
      const auto& [scene, devmap] = pair;
      const DeviationReport report = evaluate_scene(
          scene, devmap, dropped_by_scene[scene_id], config.predictor);
      save_deviation_csv(report, vdir / ("deviations_" + scene_id + ".csv"),
                         comment);
      outcome.deviations.emplace(scene_id, report);
    }

    outcomes.emplace(variant.name, std::move(outcome));
  }

  // ---- cross-variant summary -------------------------------------------
  json summary{{"config_hash", hash},
               {"seed", config.seed},
               {"threshold_ms", config.threshold_ms()},
               {"sensor_rate_hz", config.sensor_rate_hz}};

  std::map<std::string, AvailabilityReport> reports;
  for (const auto& [name, outcome] : outcomes)
    reports[name] = outcome.availability;
  json availability = json::object();
  for (const AvailabilityDelta& row :
       availability_summary(reports, "baseline")) {
    json r;
    r["drop_fraction"] =
        row.drop_fraction ? json(*row.drop_fraction) : json(nullptr);
    r["delta_vs_baseline"] =
        row.delta_vs_baseline ? json(*row.delta_vs_baseline) : json(nullptr);
    availability[row.variant] = r;
  }
  summary["availability"] = availability;

  const VariantOutcome& base = outcomes.at("baseline");
  auto latency_by_frame = [](const LatencyTrace& t) {
    std::map<std::pair<std::string, std::size_t>, double> m;
    for (const LatencyRecord& r : t) m[{r.scene_id, r.frame_index}] = r.latency_ms;
    return m;
  };
  const auto base_latency = latency_by_frame(base.trace);

  auto deviations_by_obstacle = [](const VariantOutcome& o) {
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> m;
    for (const auto& [scene_id, report] : o.deviations)
      for (const DeviationRecord& r : report.per_obstacle)
        if (r.moving) m[{scene_id, r.obstacle_id}] = {r.ade_m, r.fde_m};
    return m;
  };
  const auto base_dev = deviations_by_obstacle(base);

  json variants_json = json::object();
  for (const auto& [name, outcome] : outcomes) {
    json v;
    v["mean_latency_ms"] = mean_latency(outcome.trace);
    v["frames"] = outcome.trace.size();
    double ade_sum = 0.0, fde_sum = 0.0;
    std::size_t moving = 0;
    for (const auto& [scene_id, report] : outcome.deviations) {
      if (report.mean_ade_moving) {
        ade_sum += *report.mean_ade_moving *
                   static_cast<double>(report.moving_count);
        fde_sum += *report.mean_fde_moving *
                   static_cast<double>(report.moving_count);
        moving += report.moving_count;
      }
    }
    v["moving_obstacles"] = moving;
    v["mean_ade_moving_m"] =
        moving > 0 ? json(ade_sum / static_cast<double>(moving)) : json(nullptr);
    v["mean_fde_moving_m"] =
        moving > 0 ? json(fde_sum / static_cast<double>(moving)) : json(nullptr);

    if (name != "baseline") {
      std::vector<double> base_lat, var_lat;
      const auto var_latency = latency_by_frame(outcome.trace);
      for (const auto& [key, value] : base_latency) {
        const auto it = var_latency.find(key);
        if (it != var_latency.end()) {
          base_lat.push_back(value);
          var_lat.push_back(it->second);
        }
      }
      v["latency_stats"] =
          stats_block(base_lat, var_lat, config.stats_alternative);

      std::vector<double> base_ade, var_ade, base_fde, var_fde;
      const auto var_dev = deviations_by_obstacle(outcome);
      for (const auto& [key, value] : base_dev) {
        const auto it = var_dev.find(key);
        if (it != var_dev.end()) {
          base_ade.push_back(value.first);
          var_ade.push_back(it->second.first);
          base_fde.push_back(value.second);
          var_fde.push_back(it->second.second);
        }
      }
      if (!base_ade.empty()) {
        v["ade_stats"] = stats_block(base_ade, var_ade, config.stats_alternative);
        v["fde_stats"] = stats_block(base_fde, var_fde, config.stats_alternative);
      }
    }
    variants_json[name] = v;
  }
  summary["variants"] = variants_json;

  if (config.simulate) {
    qpn::PipelineModel model = config.simulate->model
                                   ? *config.simulate->model
                                   : qpn::preset_config(config.simulate->preset);
    model.seed = config.seed;
    model.max_tokens = config.simulate->max_tokens;
    model.arrivals = config.simulate->arrivals;
    const std::string mode_name =
        config.simulate->mode == qpn::QueueMode::Unbounded ? "unbounded"
                                                           : "keep-latest";
    summary["simulation"] = cmd_simulate(
        model, config.simulate->mode,
        root / ("sim_" + model.name + "_" + mode_name + ".csv"));
  }

  write_file_atomic(root / "run_summary.json", summary.dump(2) + "\n");
  return summary;
}

json cmd_simulate(const qpn::PipelineModel& model, qpn::QueueMode mode,
                  const std::filesystem::path& out_csv) {
  const qpn::SimMetrics metrics = qpn::run_simulation(model, mode);
  if (!out_csv.empty())
    qpn::save_sim_metrics(metrics, out_csv,
                          "model=" + model.name +
                              " seed=" + std::to_string(model.seed));
  json nodes = json::object();
  for (const auto& [name, nm] : metrics.nodes) {
    nodes[name] = {{"X", nm.throughput_fps},
                   {"U", nm.utilization},
                   {"P", nm.mean_population},
                   {"S", nm.mean_sojourn_s},
                   {"arrivals", nm.arrivals},
                   {"completions", nm.completions},
                   {"drops", nm.drops},
                   {"residual", nm.residual},
                   {"max_population", nm.max_population}};
  }
  return json{{"model", model.name},
              {"sim_time_s", metrics.sim_time_s},
              {"total_arrivals", metrics.total_arrivals},
              {"nodes", nodes}};
}

void save_detections_csv(const Scene& scene, const SceneDetections& dets,
                         const std::filesystem::path& path,
                         const std::string& file_comment) {
  std::ostringstream out;
  if (!file_comment.empty()) out << "# " << file_comment << "\n";
  out << "scene_id,frame_index,detection_index,cx,cy,cz,length,width,height,"
         "yaw,score,point_count\n";
  for (std::size_t fi = 0; fi < dets.detections.size(); ++fi) {
    for (std::size_t di = 0; di < dets.detections[fi].size(); ++di) {
      const Detection& d = dets.detections[fi][di];
      out << scene.scene_id << ',' << fi << ',' << di << ','
          << format_g9(d.box.cx) << ',' << format_g9(d.box.cy) << ','
          << format_g9(d.box.cz) << ',' << format_g9(d.box.length) << ','
          << format_g9(d.box.width) << ',' << format_g9(d.box.height) << ','
          << format_g9(d.box.yaw) << ',' << format_g9(d.score) << ','
          << d.point_count << "\n";
    }
  }
  write_file_atomic(path, out.str());
}

std::vector<std::vector<Detection>> load_detections_csv(
    const std::filesystem::path& path, const std::string& scene_id,
    std::size_t frame_count) {
  std::vector<std::vector<Detection>> out(frame_count);
  for (const auto& row : read_csv_rows(path)) {
    if (row.size() != 12)
      throw ParseError("detections " + path.string() + ": expected 12 columns");
    if (row[0] != scene_id) continue;
    const std::size_t fi = std::stoull(row[1]);
    if (fi >= frame_count)
      throw ParseError("detections " + path.string() +
                       ": frame_index out of range");
    Detection d;
    d.box.cx = std::stod(row[3]);
    d.box.cy = std::stod(row[4]);
    d.box.cz = std::stod(row[5]);
    d.box.length = std::stod(row[6]);
    d.box.width = std::stod(row[7]);
    d.box.height = std::stod(row[8]);
    d.box.yaw = std::stod(row[9]);
    d.score = std::stod(row[10]);
    d.point_count = std::stoull(row[11]);
    out[fi].push_back(d);
  }
  return out;
}

std::string render_report(const json& summary) {
  std::ostringstream out;
  out << "run " << summary.value("config_hash", std::string{"?"}) << " (seed "
      << summary.value("seed", std::uint64_t{0}) << ")\n";
  if (summary.contains("variants")) {
    out << "\nvariant                     mean_lat_ms  drop_frac   delta"
           "   mean_ADE_m  mean_FDE_m\n";
    for (const auto& [name, v] : summary.at("variants").items()) {
      const json& avail = summary.at("availability").at(name);
      auto num = [](const json& j, const char* k) {
        if (!j.contains(k) || j.at(k).is_null()) return std::string("-");
        return format_g9(j.at(k).get<double>());
      };
      char line[160];
      std::snprintf(line, sizeof(line), "%-27s %-12s %-10s %-7s %-11s %s\n",
                    name.c_str(), num(v, "mean_latency_ms").c_str(),
                    num(avail, "drop_fraction").c_str(),
                    num(avail, "delta_vs_baseline").c_str(),
                    num(v, "mean_ade_moving_m").c_str(),
                    num(v, "mean_fde_moving_m").c_str());
      out << line;
    }
  }
  if (summary.contains("simulation")) {
    out << "\nsimulation (" << summary.at("simulation").value("model", "")
        << ")\nnode    X           U           P           S_s\n";
    for (const auto& [name, nm] :
         summary.at("simulation").at("nodes").items()) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-7s %-11s %-11s %-11s %s\n",
                    name.c_str(),
                    format_g9(nm.at("X").get<double>()).c_str(),
                    format_g9(nm.at("U").get<double>()).c_str(),
                    format_g9(nm.at("P").get<double>()).c_str(),
                    format_g9(nm.at("S").get<double>()).c_str());
      out << line;
    }
  }
  return out.str();
}

}  // namespace lidarperf
