// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lidarperf::qpn {

/// The two workload types flowing through the detection pipeline.
enum class WorkloadColor { PCD, Image };

enum class ArrivalProcess { Poisson, Deterministic };

/// Unbounded: plain FIFO, backlog grows when saturated. KeepLatest: one
/// waiting slot; a newer arrival replaces (drops) the waiting token.
enum class QueueMode { Unbounded, KeepLatest };

/// A sensor feeding the pipeline; `stream_count` parallel identical streams.
struct SourceNode {
  WorkloadColor color = WorkloadColor::PCD;
  double rate_fps = 0.0;
  std::size_t stream_count = 1;
};

/// A FIFO service station with exponential service times.
struct QueueNode {
  std::string name;
  double service_rate_fps = 0.0;
};

/// A color's path through the queues; tokens leave to the sink after the
/// last hop. Transitions are immediate (zero-delay routing).
struct Route {
  WorkloadColor color = WorkloadColor::PCD;
  std::vector<std::string> path;
};

/// Description of the whole queueing network plus run parameters.
struct PipelineModel {
  std::string name = "custom";
  std::vector<SourceNode> sources;
  std::vector<QueueNode> queues;
  std::vector<Route> routes;
  std::uint64_t seed = 1;
  std::uint64_t max_tokens = 1000000;  // total arrivals across all streams
  ArrivalProcess arrivals = ArrivalProcess::Poisson;
  double warmup_fraction = 0.05;
};

/// Throws ValidationError when a route names an unknown or repeated queue,
/// a color lacks a route, or rates are not positive.
void validate_model(const PipelineModel& model);

struct NodeMetrics {
  double throughput_fps = 0.0;   // X: completions per second
  double utilization = 0.0;      // U: busy fraction
  double mean_population = 0.0;  // P: time-averaged tokens in node
  double mean_sojourn_s = 0.0;   // S: wait + service per completed token
  std::uint64_t arrivals = 0;    // full-run integer counters
  std::uint64_t completions = 0;
  std::uint64_t drops = 0;
  std::uint64_t residual = 0;    // in node when the run ends
  std::uint64_t max_population = 0;
};

struct SimMetrics {
  double sim_time_s = 0.0;
  double warmup_s = 0.0;
  std::uint64_t total_arrivals = 0;
  std::map<std::string, NodeMetrics> nodes;
};

/// The four studied configurations: "default-apollo", "low-workload-apollo",
/// "low-latency-apollo", "low-workload-autoware".
PipelineModel preset_config(const std::string& name);

/// Event-driven simulation. Rate metrics are computed after discarding the
/// first `warmup_fraction` of the expected horizon; the integer counters
/// cover the whole run and satisfy arrivals = completions + drops + residual
/// exactly at every node.
SimMetrics run_simulation(const PipelineModel& model, QueueMode mode);

struct Mm1Metrics {
  double utilization = 0.0;
  double mean_population = 0.0;
  double mean_sojourn_s = 0.0;
};

/// Closed-form M/M/1 steady state; throws UnstableQueueError when
/// lambda >= mu.
Mm1Metrics analytic_mm1(double lambda_fps, double mu_fps);

std::string to_string(WorkloadColor color);
WorkloadColor color_from_string(const std::string& s);

/// Config-file serialization (round-trips exactly).
std::string model_to_json_string(const PipelineModel& model);
PipelineModel model_from_json_string(const std::string& text);

/// CSV emission: node, metric, value rows.
void save_sim_metrics(const SimMetrics& metrics,
                      const std::filesystem::path& path,
                      const std::string& file_comment);

}  // namespace lidarperf::qpn
