// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#include "lidarperf/qpn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lidarperf/error.hpp"
#include "lidarperf/io.hpp"
#include "lidarperf/rng.hpp"

namespace lidarperf::qpn {

using nlohmann::json;

std::string to_string(WorkloadColor color) {
  return color == WorkloadColor::PCD ? "PCD" : "Image";
}

WorkloadColor color_from_string(const std::string& s) {
  if (s == "PCD") return WorkloadColor::PCD;
  if (s == "Image") return WorkloadColor::Image;
  throw ParameterError("unknown workload color '" + s + "'");
}

void validate_model(const PipelineModel& model) {
  if (model.sources.empty()) throw ValidationError("model has no sources");
  if (model.queues.empty()) throw ValidationError("model has no queues");
  std::set<std::string> queue_names;
  for (const QueueNode& q : model.queues) {
    if (!(q.service_rate_fps > 0.0))
      throw ValidationError("queue '" + q.name +
                            "': service rate must be positive");
    if (!queue_names.insert(q.name).second)
      throw ValidationError("duplicate queue name '" + q.name + "'");
  }
  std::set<WorkloadColor> routed;
  for (const Route& r : model.routes) {
    if (r.path.empty())
      throw ValidationError("route for color " + to_string(r.color) +
                            " is empty");
    std::set<std::string> seen;
    for (const std::string& hop : r.path) {
      if (queue_names.count(hop) == 0)
        throw ValidationError("route names unknown queue '" + hop + "'");
      if (!seen.insert(hop).second)
        throw ValidationError("route revisits queue '" + hop +
                              "' (must be acyclic)");
    }
    routed.insert(r.color);
  }
  for (const SourceNode& s : model.sources) {
    if (!(s.rate_fps > 0.0))
      throw ValidationError("source rate must be positive");
    if (s.stream_count < 1)
      throw ValidationError("source stream_count must be >= 1");
    if (routed.count(s.color) == 0)
      throw ValidationError("no route for color " + to_string(s.color));
  }
  if (model.max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  if (!(model.warmup_fraction >= 0.0 && model.warmup_fraction < 1.0))
    throw ValidationError("warmup_fraction must be in [0, 1)");
}

PipelineModel preset_config(const std::string& name) {
  PipelineModel m;
  m.name = name;
  if (name == "default-apollo" || name == "low-workload-apollo" ||
      name == "low-latency-apollo") {
    const bool low_workload = name != "default-apollo";
    const double lambda_2d = low_workload ? 15.0 : 12.0;
    const double lambda_3d = low_workload ? 10.0 : 20.0;
    const double mu_3d = name == "low-latency-apollo" ? 10.5 : 8.5;
    m.sources = {{WorkloadColor::Image, lambda_2d, 2},
                 {WorkloadColor::PCD, lambda_3d, 1}};
    m.queues = {{"Det2D", 125.0}, {"Det3D", mu_3d}, {"MSF", 250.0}};
    m.routes = {{WorkloadColor::Image, {"Det2D", "MSF"}},
                {WorkloadColor::PCD, {"Det3D", "MSF"}}};
  } else if (name == "low-workload-autoware") {
    m.sources = {{WorkloadColor::PCD, 10.0, 1}};
    m.queues = {{"Det3D", 7.8}};
    m.routes = {{WorkloadColor::PCD, {"Det3D"}}};
  } else {
    throw ParameterError("unknown preset '" + name + "'");
  }
  validate_model(m);
  return m;
}

Mm1Metrics analytic_mm1(double lambda_fps, double mu_fps) {
  if (!(mu_fps > 0.0)) throw ParameterError("analytic_mm1: mu must be positive");
  if (lambda_fps < 0.0)
    throw ParameterError("analytic_mm1: lambda must be non-negative");
  if (lambda_fps >= mu_fps)
    throw UnstableQueueError("analytic_mm1: lambda >= mu has no steady state");
  const double rho = lambda_fps / mu_fps;
  return {rho, rho / (1.0 - rho), 1.0 / (mu_fps - lambda_fps)};
}

namespace {

struct Token {
  std::size_t route = 0;   // index into model.routes
  std::size_t hop = 0;     // position along the route
  double node_arrival = 0.0;
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  bool is_arrival = false;
  std::size_t index = 0;  // stream index or queue index

  bool operator>(const Event& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

struct QueueState {
  double mu = 0.0;
  std::optional<Token> in_service;
  std::deque<Token> waiting;
  // full-run counters
  std::uint64_t arrivals = 0, completions = 0, drops = 0;
  std::uint64_t max_population = 0;
  // windowed accumulators (after warm-up)
  double pop_integral = 0.0, busy_integral = 0.0, sojourn_sum = 0.0;
  std::uint64_t completions_post = 0;

  std::uint64_t population() const {
    return waiting.size() + (in_service ? 1 : 0);
  }
};

struct Stream {
  std::size_t route = 0;
  double rate = 0.0;
};

}  // namespace

SimMetrics run_simulation(const PipelineModel& model, QueueMode mode) {
  validate_model(model);

  std::vector<Stream> streams;
  double total_rate = 0.0;
  for (const SourceNode& src : model.sources) {
    std::size_t route_idx = 0;
    for (std::size_t r = 0; r < model.routes.size(); ++r)
      if (model.routes[r].color == src.color) route_idx = r;
    for (std::size_t s = 0; s < src.stream_count; ++s) {
      streams.push_back({route_idx, src.rate_fps});
      total_rate += src.rate_fps;
    }
  }

  std::vector<QueueState> queues(model.queues.size());
  std::map<std::string, std::size_t> queue_index;
  for (std::size_t i = 0; i < model.queues.size(); ++i) {
    queues[i].mu = model.queues[i].service_rate_fps;
    queue_index[model.queues[i].name] = i;
  }

  Rng rng(model.seed);
  const double warm_time =
      model.warmup_fraction * static_cast<double>(model.max_tokens) / total_rate;

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
  std::uint64_t seq = 0;
  auto push_event = [&](double time, bool is_arrival, std::size_t index) {
    events.push({time, seq++, is_arrival, index});
  };

  auto interarrival = [&](const Stream& s) {
    return model.arrivals == ArrivalProcess::Poisson
               ? rng.exponential(s.rate)
               : 1.0 / s.rate;
  };

  for (std::size_t s = 0; s < streams.size(); ++s)
    push_event(interarrival(streams[s]), true, s);

  std::uint64_t admitted = 0;
  double t_end = -1.0;  // set when the last token is admitted
  double last_time = 0.0;

  auto integrate_to = [&](double now) {
    double lo = last_time;
    if (now <= lo) return;
    const double hi = now;
    const double from = std::max(lo, warm_time);
    if (hi > from) {
      const double w = hi - from;
      for (QueueState& q : queues) {
        q.pop_integral += static_cast<double>(q.population()) * w;
        if (q.in_service) q.busy_integral += w;
      }
    }
  };

  auto start_service = [&](QueueState& q, std::size_t qi, Token token,
                           double now) {
    q.in_service = token;
    push_event(now + rng.exponential(q.mu), false, qi);
  };

  auto deliver = [&](Token token, double now) {
    const std::size_t qi = queue_index.at(
        model.routes[token.route].path[token.hop]);
    QueueState& q = queues[qi];
    token.node_arrival = now;
    q.arrivals += 1;
    if (!q.in_service) {
      start_service(q, qi, token, now);
    } else if (mode == QueueMode::Unbounded) {
      q.waiting.push_back(token);
    } else {
      if (q.waiting.empty()) {
        q.waiting.push_back(token);
      } else {
        // keep-latest: the stale waiting token is discarded
        q.waiting.back() = token;
        q.drops += 1;
      }
    }
    q.max_population = std::max(q.max_population, q.population());
  };

  while (!events.empty()) {
    const Event ev = events.top();
    if (t_end >= 0.0 && ev.time > t_end) break;
    events.pop();
    integrate_to(ev.time);
    last_time = ev.time;

    if (ev.is_arrival) {
      if (admitted >= model.max_tokens) continue;
      admitted += 1;
      Token token;
      token.route = streams[ev.index].route;
      token.hop = 0;
      deliver(token, ev.time);
      if (admitted == model.max_tokens)
        t_end = ev.time;
      else
        push_event(ev.time + interarrival(streams[ev.index]), true, ev.index);
    } else {
      QueueState& q = queues[ev.index];
      Token token = *q.in_service;
      q.in_service.reset();
      q.completions += 1;
      if (ev.time >= warm_time) {
        q.completions_post += 1;
        q.sojourn_sum += ev.time - token.node_arrival;
      }
      if (!q.waiting.empty()) {
        Token next = q.waiting.front();
        q.waiting.pop_front();
        start_service(q, ev.index, next, ev.time);
      }
      token.hop += 1;
      if (token.hop < model.routes[token.route].path.size())
        deliver(token, ev.time);
    }
  }

  if (t_end < 0.0) t_end = last_time;
  const double window = t_end - warm_time;

  SimMetrics metrics;
  metrics.sim_time_s = t_end;
  metrics.warmup_s = warm_time;
  metrics.total_arrivals = admitted;
  for (std::size_t i = 0; i < model.queues.size(); ++i) {
    const QueueState& q = queues[i];
    NodeMetrics nm;
    nm.arrivals = q.arrivals;
    nm.completions = q.completions;
    nm.drops = q.drops;
    nm.residual = q.population();
    nm.max_population = q.max_population;
    if (window > 0.0) {
      nm.throughput_fps = static_cast<double>(q.completions_post) / window;
      nm.utilization = q.busy_integral / window;
      nm.mean_population = q.pop_integral / window;
    }
    nm.mean_sojourn_s =
        q.completions_post > 0
            ? q.sojourn_sum / static_cast<double>(q.completions_post)
            : 0.0;
    metrics.nodes[model.queues[i].name] = nm;
  }
  return metrics;
}

namespace {

json model_to_json(const PipelineModel& m) {
  json sources = json::array();
  for (const SourceNode& s : m.sources)
    sources.push_back({{"color", to_string(s.color)},
                       {"rate_fps", s.rate_fps},
                       {"stream_count", s.stream_count}});
  json queues = json::array();
  for (const QueueNode& q : m.queues)
    queues.push_back({{"name", q.name},
                      {"service_rate_fps", q.service_rate_fps}});
  json routes = json::array();
  for (const Route& r : m.routes)
    routes.push_back({{"color", to_string(r.color)}, {"path", r.path}});
  return json{{"name", m.name},
              {"sources", sources},
              {"queues", queues},
              {"routes", routes},
              {"seed", m.seed},
              {"max_tokens", m.max_tokens},
              {"arrivals", m.arrivals == ArrivalProcess::Poisson
                               ? "poisson"
                               : "deterministic"},
              {"warmup_fraction", m.warmup_fraction}};
}

}  // namespace

std::string model_to_json_string(const PipelineModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

PipelineModel model_from_json_string(const std::string& text) {
  PipelineModel m;
  try {
    const json j = json::parse(text);
    m.name = j.at("name").get<std::string>();
    for (const json& s : j.at("sources"))
      m.sources.push_back({color_from_string(s.at("color").get<std::string>()),
                           s.at("rate_fps").get<double>(),
                           s.at("stream_count").get<std::size_t>()});
    for (const json& q : j.at("queues"))
      m.queues.push_back({q.at("name").get<std::string>(),
                          q.at("service_rate_fps").get<double>()});
    for (const json& r : j.at("routes"))
      m.routes.push_back(
          {color_from_string(r.at("color").get<std::string>()),
           r.at("path").get<std::vector<std::string>>()});
    m.seed = j.at("seed").get<std::uint64_t>();
    m.max_tokens = j.at("max_tokens").get<std::uint64_t>();
    const std::string arr = j.at("arrivals").get<std::string>();
    if (arr == "poisson")
      m.arrivals = ArrivalProcess::Poisson;
    else if (arr == "deterministic")
      m.arrivals = ArrivalProcess::Deterministic;
    else
      throw ParseError("unknown arrival process '" + arr + "'");
    m.warmup_fraction = j.at("warmup_fraction").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("pipeline model: ") + e.what());
  }
  validate_model(m);
  return m;
}

void save_sim_metrics(const SimMetrics& metrics,
                      const std::filesystem::path& path,
                      const std::string& file_comment) {
  std::ostringstream out;
  if (!file_comment.empty()) out << "# " << file_comment << "\n";
  out << "node,metric,value\n";
  for (const auto& [name, nm] : metrics.nodes) {
    out << name << ",X," << format_g9(nm.throughput_fps) << "\n";
    out << name << ",U," << format_g9(nm.utilization) << "\n";
    out << name << ",P," << format_g9(nm.mean_population) << "\n";
    out << name << ",S," << format_g9(nm.mean_sojourn_s) << "\n";
    out << name << ",arrivals," << nm.arrivals << "\n";
    out << name << ",completions," << nm.completions << "\n";
    out << name << ",drops," << nm.drops << "\n";
    out << name << ",residual," << nm.residual << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace lidarperf::qpn
