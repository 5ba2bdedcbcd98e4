// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/config.hpp"

#include <json.hpp>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/rng.hpp"

namespace lidarperf {

using nlohmann::json;

namespace {

std::string alternative_to_string(stats::Alternative a) {
  switch (a) {
    case stats::Alternative::TwoSided: return "two-sided";
    case stats::Alternative::Greater: return "greater";
    case stats::Alternative::Less: return "less";
  }
  return "two-sided";
}

stats::Alternative alternative_from_string(const std::string& s) {
  if (s == "two-sided") return stats::Alternative::TwoSided;
  if (s == "greater") return stats::Alternative::Greater;
  if (s == "less") return stats::Alternative::Less;
  throw ParseError("unknown stats alternative '" + s + "'");
}

std::string queue_mode_to_string(qpn::QueueMode m) {
  return m == qpn::QueueMode::Unbounded ? "unbounded" : "keep-latest";
}

qpn::QueueMode queue_mode_from_string(const std::string& s) {
  if (s == "unbounded") return qpn::QueueMode::Unbounded;
  if (s == "keep-latest") return qpn::QueueMode::KeepLatest;
  throw ParseError("unknown queue mode '" + s + "'");
}

std::string arrivals_to_string(qpn::ArrivalProcess a) {
  return a == qpn::ArrivalProcess::Poisson ? "poisson" : "deterministic";
}

qpn::ArrivalProcess arrivals_from_string(const std::string& s) {
  if (s == "poisson") return qpn::ArrivalProcess::Poisson;
  if (s == "deterministic") return qpn::ArrivalProcess::Deterministic;
  throw ParseError("unknown arrival process '" + s + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }

  RunConfig cfg;
  try {
    if (!j.contains("seed"))
      throw ValidationError("run config: 'seed' is mandatory");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    for (const json& p : j.value("scenes", json::array()))
      cfg.scene_paths.emplace_back(p.get<std::string>());
    cfg.output_dir = j.value("output_dir", std::string{"out"});

    for (const json& m : j.value("mutations", json::array())) {
      MutationSpec spec;
      spec.kind = mutation_kind_from_string(m.at("kind").get<std::string>());
      if (m.contains("direction"))
        spec.direction =
            mutation_direction_from_string(m.at("direction").get<std::string>());
      else if (spec.kind == MutationKind::MoveObstacles)
        spec.direction = MutationDirection::TowardCenter;
      spec.distance_m = m.value(
          "distance_m", spec.kind == MutationKind::AddObstacles ? 3.0 : 0.1);
      if (!(spec.distance_m > 0.0))
        throw ValidationError("mutation distance_m must be positive");
      spec.seed = m.value("seed", cfg.seed);
      cfg.mutations.push_back(spec);
    }

    if (j.contains("detector")) {
      const json& d = j.at("detector");
      cfg.detector.cluster_radius_m = d.value("cluster_radius_m", 0.5);
      cfg.detector.min_points = d.value("min_points", std::size_t{5});
      cfg.detector.iou_threshold = d.value("iou_threshold", 0.5);
      if (d.contains("latency_preset")) {
        cfg.latency_preset = d.at("latency_preset").get<std::string>();
        cfg.detector.latency = latency_preset(cfg.latency_preset);
      } else if (d.contains("latency_model")) {
        cfg.latency_preset.clear();
        const json& lm = d.at("latency_model");
        cfg.detector.latency.c0_ms = lm.value("c0_ms", 0.0);
        cfg.detector.latency.c1_ms = lm.value("c1_ms", 0.0);
        cfg.detector.latency.c3_ms = lm.value("c3_ms", 0.0);
        cfg.detector.latency.noise_sigma_ms = lm.value("noise_sigma_ms", 0.0);
      }
      if (d.contains("noise_sigma_ms"))
        cfg.detector.latency.noise_sigma_ms =
            d.at("noise_sigma_ms").get<double>();
    } else {
      cfg.detector.latency = latency_preset(cfg.latency_preset);
    }
    cfg.detector.seed = cfg.seed;

    cfg.sensor_rate_hz = j.value("sensor_rate_hz", 20.0);
    if (!(cfg.sensor_rate_hz > 0.0))
      throw ValidationError("sensor_rate_hz must be positive");
    if (j.contains("availability_threshold_ms") &&
        !j.at("availability_threshold_ms").is_null())
      cfg.availability_threshold_ms =
          j.at("availability_threshold_ms").get<double>();

    if (j.contains("predictor")) {
      const json& p = j.at("predictor");
      cfg.predictor.horizon = p.value("horizon", std::size_t{6});
      cfg.predictor.step_dt_s = p.value("step_dt_s", 0.5);
      cfg.predictor.fit_window = p.value("fit_window", std::size_t{4});
      cfg.predictor.moving_threshold_m = p.value("moving_threshold_m", 1.0);
    }

    if (j.contains("stats"))
      cfg.stats_alternative = alternative_from_string(
          j.at("stats").value("alternative", std::string{"two-sided"}));

    if (j.contains("simulate") && !j.at("simulate").is_null()) {
      const json& s = j.at("simulate");
      SimulateParams sim;
      sim.preset = s.value("preset", std::string{"low-latency-apollo"});
      if (s.contains("model") && !s.at("model").is_null())
        sim.model = qpn::model_from_json_string(s.at("model").dump());
      sim.mode = queue_mode_from_string(
          s.value("mode", std::string{"unbounded"}));
      sim.max_tokens = s.value("max_tokens", std::uint64_t{1000000});
      sim.arrivals = arrivals_from_string(
          s.value("arrivals", std::string{"poisson"}));
      cfg.simulate = sim;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

std::string run_config_to_json(const RunConfig& cfg) {
  json mutations = json::array();
  for (const MutationSpec& m : cfg.mutations) {
    mutations.push_back({{"kind", to_string(m.kind)},
                         {"direction", to_string(m.direction)},
                         {"distance_m", m.distance_m},
                         {"seed", m.seed}});
  }
  json scenes = json::array();
  for (const auto& p : cfg.scene_paths) scenes.push_back(p.string());

  json detector{{"cluster_radius_m", cfg.detector.cluster_radius_m},
                {"min_points", cfg.detector.min_points},
                {"iou_threshold", cfg.detector.iou_threshold}};
  if (!cfg.latency_preset.empty()) {
    detector["latency_preset"] = cfg.latency_preset;
    detector["noise_sigma_ms"] = cfg.detector.latency.noise_sigma_ms;
  } else {
    detector["latency_model"] = {
        {"c0_ms", cfg.detector.latency.c0_ms},
        {"c1_ms", cfg.detector.latency.c1_ms},
        {"c3_ms", cfg.detector.latency.c3_ms},
        {"noise_sigma_ms", cfg.detector.latency.noise_sigma_ms}};
  }

  json j{{"seed", cfg.seed},
         {"scenes", scenes},
         {"output_dir", cfg.output_dir.string()},
         {"mutations", mutations},
         {"detector", detector},
         {"sensor_rate_hz", cfg.sensor_rate_hz},
         {"predictor",
          {{"horizon", cfg.predictor.horizon},
           {"step_dt_s", cfg.predictor.step_dt_s},
           {"fit_window", cfg.predictor.fit_window},
           {"moving_threshold_m", cfg.predictor.moving_threshold_m}}},
         {"stats", {{"alternative", alternative_to_string(cfg.stats_alternative)}}}};
  if (cfg.availability_threshold_ms)
    j["availability_threshold_ms"] = *cfg.availability_threshold_ms;
  else
    j["availability_threshold_ms"] = nullptr;
  if (cfg.simulate) {
    j["simulate"] = {{"preset", cfg.simulate->preset},
                     {"mode", queue_mode_to_string(cfg.simulate->mode)},
                     {"max_tokens", cfg.simulate->max_tokens},
                     {"arrivals", arrivals_to_string(cfg.simulate->arrivals)}};
    if (cfg.simulate->model)
      j["simulate"]["model"] =
          json::parse(qpn::model_to_json_string(*cfg.simulate->model));
  }
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
  // the hash identifies the experiment, not where its results land
  RunConfig canonical = config;
  canonical.output_dir.clear();
  const std::uint64_t h = fnv1a64(run_config_to_json(canonical));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void check_paths_exist(const RunConfig& config) {
  for (const auto& p : config.scene_paths) {
    if (!std::filesystem::exists(p / "manifest.json"))
      throw ValidationError("scene path does not exist or lacks manifest: " +
                            p.string());
  }
}

}  // namespace lidarperf
