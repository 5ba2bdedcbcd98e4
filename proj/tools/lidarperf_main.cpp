// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 1 usage, 2 data validation,
// 3 stage failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lidarperf/availability.hpp"
#include "lidarperf/config.hpp"
#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/pipeline.hpp"

namespace {

using namespace lidarperf;

RunConfig load_config_with_overrides(const std::string& config_path,
                                     const std::optional<std::uint64_t>& seed,
                                     const std::string& output_dir) {
  RunConfig cfg = load_run_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.detector.seed = *seed;
    for (auto& m : cfg.mutations) m.seed = *seed;
  }
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  return cfg;
}

qpn::QueueMode parse_mode(const std::string& s) {
  if (s == "unbounded") return qpn::QueueMode::Unbounded;
  if (s == "keep-latest") return qpn::QueueMode::KeepLatest;
  throw ParameterError("unknown queue mode '" + s + "'");
}

qpn::ArrivalProcess parse_arrivals(const std::string& s) {
  if (s == "poisson") return qpn::ArrivalProcess::Poisson;
  if (s == "deterministic") return qpn::ArrivalProcess::Deterministic;
  throw ParameterError("unknown arrival process '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lidarperf: latency stress testing for LiDAR perception "
               "pipelines"};
  app.require_subcommand(1);

  // shared config-driven options
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string output_override;

  auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config JSON")->required();
    cmd->add_option("--seed", seed_override, "override the config seed");
    cmd->add_option("--output-dir", output_override,
                    "override the config output directory");
  };

  CLI::App* cmd_run_app = app.add_subcommand(
      "run", "full pipeline: mutate, detect, availability, trajectory, stats");
  add_config_options(cmd_run_app);

  CLI::App* cmd_mutate_app =
      app.add_subcommand("mutate", "write mutated scene variants only");
  add_config_options(cmd_mutate_app);

  // simulate
  std::string sim_preset = "low-latency-apollo";
  std::string sim_model_file;
  std::string sim_mode = "unbounded";
  std::string sim_arrivals = "poisson";
  std::uint64_t sim_seed = 1;
  std::uint64_t sim_tokens = 1000000;
  std::string sim_out = "sim_metrics.csv";
  CLI::App* cmd_sim_app =
      app.add_subcommand("simulate", "queueing simulation of the pipeline");
  cmd_sim_app->add_option("--preset", sim_preset,
                          "default-apollo | low-workload-apollo | "
                          "low-latency-apollo | low-workload-autoware");
  cmd_sim_app->add_option("--model", sim_model_file,
                          "pipeline model JSON (overrides --preset)");
  cmd_sim_app->add_option("--mode", sim_mode, "unbounded | keep-latest");
  cmd_sim_app->add_option("--arrivals", sim_arrivals,
                          "poisson | deterministic");
  cmd_sim_app->add_option("--seed", sim_seed, "simulation seed");
  cmd_sim_app->add_option("--max-tokens", sim_tokens,
                          "total arrivals to generate");
  cmd_sim_app->add_option("--out", sim_out, "metrics CSV path");

  // detect
  std::string det_scene, det_preset = "apollo-nuscenes";
  std::string det_trace = "latency.csv", det_out = "detections.csv";
  double det_radius = 0.5, det_sigma = -1.0;
  std::size_t det_min_points = 5;
  std::uint64_t det_seed = 1;
  bool det_measure = false;
  CLI::App* cmd_det_app =
      app.add_subcommand("detect", "surrogate detection over one scene");
  cmd_det_app->add_option("--scene", det_scene, "scene directory")->required();
  cmd_det_app->add_option("--latency-preset", det_preset,
                          "apollo-nuscenes | autoware-awsim");
  cmd_det_app->add_option("--cluster-radius", det_radius, "meters");
  cmd_det_app->add_option("--min-points", det_min_points, "cluster threshold");
  cmd_det_app->add_option("--noise-sigma", det_sigma,
                          "latency noise sigma in ms (-1 = preset value)");
  cmd_det_app->add_option("--seed", det_seed, "latency noise seed");
  cmd_det_app->add_flag("--measure", det_measure,
                        "record wall-clock compute time instead of the "
                        "latency model (smoke testing only)");
  cmd_det_app->add_option("--out-trace", det_trace, "latency CSV path");
  cmd_det_app->add_option("--out-detections", det_out, "detections CSV path");

  // availability
  std::string av_trace, av_csv = "availability.csv", av_json = "availability.json";
  double av_rate = 20.0, av_threshold = -1.0;
  CLI::App* cmd_av_app = app.add_subcommand(
      "availability", "delays and dropped frames from a latency trace");
  cmd_av_app->add_option("--trace", av_trace, "latency CSV")->required();
  cmd_av_app->add_option("--sensor-rate", av_rate, "sensor rate in Hz");
  cmd_av_app->add_option("--threshold", av_threshold,
                         "accumulated-delay threshold in ms "
                         "(-1 = one frame budget)");
  cmd_av_app->add_option("--out-csv", av_csv, "per-frame CSV path");
  cmd_av_app->add_option("--out-json", av_json, "summary JSON path");

  // trajectory
  std::string tr_scene, tr_detections, tr_availability;
  std::string tr_out = "deviations.csv", tr_summary = "deviations.json";
  double tr_iou = 0.5, tr_step = 0.5, tr_moving = 1.0;
  std::size_t tr_horizon = 6, tr_fit = 4;
  CLI::App* cmd_tr_app = app.add_subcommand(
      "trajectory", "prediction deviations caused by dropped frames");
  cmd_tr_app->add_option("--scene", tr_scene, "scene directory")->required();
  cmd_tr_app->add_option("--detections", tr_detections, "detections CSV")
      ->required();
  cmd_tr_app->add_option("--availability", tr_availability,
                         "availability JSON")->required();
  cmd_tr_app->add_option("--iou-threshold", tr_iou, "match threshold");
  cmd_tr_app->add_option("--horizon", tr_horizon, "prediction steps");
  cmd_tr_app->add_option("--step-dt", tr_step, "prediction step in seconds");
  cmd_tr_app->add_option("--fit-window", tr_fit, "velocity fit samples");
  cmd_tr_app->add_option("--moving-threshold", tr_moving,
                         "meters of GT displacement to count as moving");
  cmd_tr_app->add_option("--out", tr_out, "deviation CSV path");
  cmd_tr_app->add_option("--summary", tr_summary, "summary JSON path");

  // stats
  std::string st_baseline, st_variant, st_alt = "two-sided";
  std::string st_out = "stats.json";
  CLI::App* cmd_st_app = app.add_subcommand(
      "stats", "paired nonparametric comparison of two latency traces");
  cmd_st_app->add_option("--baseline", st_baseline, "baseline latency CSV")
      ->required();
  cmd_st_app->add_option("--variant", st_variant, "variant latency CSV")
      ->required();
  cmd_st_app->add_option("--alternative", st_alt,
                         "two-sided | greater | less");
  cmd_st_app->add_option("--out", st_out, "result JSON path");

  // report
  std::string rep_summary;
  CLI::App* cmd_rep_app =
      app.add_subcommand("report", "render a run summary as a table");
  cmd_rep_app->add_option("--summary", rep_summary, "run_summary.json path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (cmd_run_app->parsed()) {
      const RunConfig cfg = load_config_with_overrides(
          config_path, seed_override, output_override);
      cmd_run(cfg);
      std::cout << "run complete: "
                << (cfg.output_dir / "run_summary.json").string() << "\n";
    } else if (cmd_mutate_app->parsed()) {
      const RunConfig cfg = load_config_with_overrides(
          config_path, seed_override, output_override);
      const auto summary = cmd_mutate(cfg);
      std::cout << "variants written: " << summary.at("variants").size()
                << "\n";
    } else if (cmd_sim_app->parsed()) {
      qpn::PipelineModel model;
      if (!sim_model_file.empty())
        model = qpn::model_from_json_string(read_file(sim_model_file));
      else
        model = qpn::preset_config(sim_preset);
      model.seed = sim_seed;
      model.max_tokens = sim_tokens;
      model.arrivals = parse_arrivals(sim_arrivals);
      const auto metrics = cmd_simulate(model, parse_mode(sim_mode), sim_out);
      std::cout << metrics.dump(2) << "\n";
    } else if (cmd_det_app->parsed()) {
      const Scene scene = load_scene(det_scene);
      DetectorParams params;
      params.cluster_radius_m = det_radius;
      params.min_points = det_min_points;
      params.latency = latency_preset(det_preset);
      if (det_sigma >= 0.0) params.latency.noise_sigma_ms = det_sigma;
      params.seed = det_seed;
      const SceneDetections dets = detect_scene(scene, params, det_measure);
      const std::string comment = "seed=" + std::to_string(det_seed) +
                                  (det_measure ? " measured=wall-clock" : "");
      save_latency_trace(dets.trace, det_trace, comment);
      save_detections_csv(scene, dets, det_out, comment);
      std::cout << "frames: " << dets.trace.size() << "\n";
    } else if (cmd_av_app->parsed()) {
      const LatencyTrace trace = load_latency_trace(av_trace);
      const DelayTrace delays = compute_delays(trace, av_rate);
      const double threshold = av_threshold > 0.0 ? av_threshold : 1000.0 / av_rate;
      const AvailabilityReport report =
          compute_dropped_frames(delays, threshold);
      save_availability_csv(delays, report, av_csv, "");
      save_availability_json(report, av_json, "", 0);
      std::cout << "dropped " << report.dropped_frames.size() << " of "
                << report.total_frames << " frames\n";
    } else if (cmd_tr_app->parsed()) {
      const Scene scene = load_scene(tr_scene);
      SceneDetections dets;
      dets.detections =
          load_detections_csv(tr_detections, scene.scene_id,
                              scene.frames.size());
      const DeviationMap devmap = match_scene(scene, dets, tr_iou);
      const nlohmann::json av =
          nlohmann::json::parse(read_file(tr_availability));
      std::set<std::size_t> dropped;
      for (const auto& f : av.at("dropped_frames"))
        if (f.at("scene_id").get<std::string>() == scene.scene_id)
          dropped.insert(f.at("frame_index").get<std::size_t>());
      PredictorParams params;
      params.horizon = tr_horizon;
      params.step_dt_s = tr_step;
      params.fit_window = tr_fit;
      params.moving_threshold_m = tr_moving;
      const DeviationReport report =
          evaluate_scene(scene, devmap, dropped, params);
      save_deviation_csv(report, tr_out, "");
      nlohmann::json summary{
          {"moving_obstacles", report.moving_count},
          {"mean_ade_moving_m", report.mean_ade_moving
                                    ? nlohmann::json(*report.mean_ade_moving)
                                    : nlohmann::json(nullptr)},
          {"mean_fde_moving_m", report.mean_fde_moving
                                    ? nlohmann::json(*report.mean_fde_moving)
                                    : nlohmann::json(nullptr)}};
      write_file_atomic(tr_summary, summary.dump(2) + "\n");
      std::cout << "obstacles: " << report.per_obstacle.size() << " ("
                << report.moving_count << " moving)\n";
    } else if (cmd_st_app->parsed()) {
      const LatencyTrace a = load_latency_trace(st_baseline);
      const LatencyTrace b = load_latency_trace(st_variant);
      std::map<std::pair<std::string, std::size_t>, double> base;
      for (const auto& r : a) base[{r.scene_id, r.frame_index}] = r.latency_ms;
      std::vector<double> xs, ys;
      for (const auto& r : b) {
        const auto it = base.find({r.scene_id, r.frame_index});
        if (it != base.end()) {
          xs.push_back(it->second);
          ys.push_back(r.latency_ms);
        }
      }
      stats::Alternative alt = stats::Alternative::TwoSided;
      if (st_alt == "greater") alt = stats::Alternative::Greater;
      else if (st_alt == "less") alt = stats::Alternative::Less;
      else if (st_alt != "two-sided")
        throw ParameterError("unknown alternative '" + st_alt + "'");
      nlohmann::json out;
      try {
        const auto w = stats::wilcoxon_signed_rank({xs, ys}, alt);
        out["p_value"] = w.p_value;
        out["z"] = w.z;
        out["effect_r"] = w.effect_r;
        out["n_nonzero"] = w.n_used;
        out["exact"] = w.exact;
      } catch (const DegenerateSampleError& e) {
        out["degenerate"] = true;
        out["note"] = e.what();
      }
      if (!xs.empty()) {
        const auto cd = stats::cliffs_delta(xs, ys);
        out["cliffs_delta"] = cd.delta;
        out["magnitude"] = stats::to_string(cd.magnitude);
      }
      write_file_atomic(st_out, out.dump(2) + "\n");
      std::cout << out.dump(2) << "\n";
    } else if (cmd_rep_app->parsed()) {
      const nlohmann::json summary =
          nlohmann::json::parse(read_file(rep_summary));
      std::cout << render_report(summary);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
