// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidarperf/detect.hpp"
#include "lidarperf/mutate.hpp"
#include "lidarperf/qpn.hpp"
#include "lidarperf/stats.hpp"
#include "lidarperf/trajectory.hpp"

namespace lidarperf {

/// Optional queueing-simulation block of a run config. Either a preset name
/// or an inline pipeline model.
struct SimulateParams {
  std::string preset = "low-latency-apollo";
  std::optional<qpn::PipelineModel> model;  // overrides `preset` when set
  qpn::QueueMode mode = qpn::QueueMode::Unbounded;
  std::uint64_t max_tokens = 1000000;
  qpn::ArrivalProcess arrivals = qpn::ArrivalProcess::Poisson;
};

/// One JSON document drives a whole run; the master seed fans out to
/// per-stage, per-frame sub-streams.
struct RunConfig {
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> scene_paths;
  std::filesystem::path output_dir;
  std::vector<MutationSpec> mutations;
  DetectorParams detector;
  std::string latency_preset = "apollo-nuscenes";  // "" = explicit values
  double sensor_rate_hz = 20.0;
  std::optional<double> availability_threshold_ms;  // default: 1000/rate
  PredictorParams predictor;
  stats::Alternative stats_alternative = stats::Alternative::TwoSided;
  std::optional<SimulateParams> simulate;

  double threshold_ms() const {
    return availability_threshold_ms ? *availability_threshold_ms
                                     : 1000.0 / sensor_rate_hz;
  }
};

/// Parses and validates a config document; unknown mutation kinds, missing
/// seed or malformed fields raise ParseError/ValidationError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical serialization (stable key order); hash of this string names
/// every output the run produces.
std::string run_config_to_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

/// Referenced scene paths must exist; throws ValidationError otherwise.
void check_paths_exist(const RunConfig& config);

}  // namespace lidarperf
