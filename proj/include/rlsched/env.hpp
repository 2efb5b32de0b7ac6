#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlsched/cluster.hpp"
#include "rlsched/rational.hpp"
#include "rlsched/scenarios.hpp"
#include "rlsched/workload.hpp"

namespace rlsched {

enum class Representation { image, compact };
enum class Transitions { dense, sparse };
enum class RewardScope { all_jobs, window };

struct EnvConfig {
  Representation representation = Representation::image;
  Transitions transitions = Transitions::dense;
  RewardScope reward_scope = RewardScope::all_jobs;
  std::int64_t window = 10;    // W
  std::int64_t horizon = 20;   // H
  Time episode_length = 100;   // T
  // Height of the image backlog column; 0 means H.
  std::int64_t backlog_view_cap = 0;
  // Scale compact features into roughly [0, 1]. Off by default.
  bool normalize = false;
  ScenarioConfig scenario = {};

  void validate() const;

  std::size_t image_width() const;
  std::size_t observation_size() const;
  std::vector<std::size_t> observation_shape() const;
  std::size_t action_count() const { return static_cast<std::size_t>(window) + 1; }
};

// Parses "rep=compact,trans=sparse,rew=window,W=10,H=20,T=100". Keys may
// appear in any order; omitted keys keep the defaults of `base`.
EnvConfig parse_env_spec(std::string_view spec, EnvConfig base = {});
std::string to_env_spec(const EnvConfig& config);

// Row-major observation; shape is {H, width} for images and {length} for
// compact vectors.
struct Observation {
  std::vector<double> data;
  std::vector<std::size_t> shape;

  std::size_t size() const { return data.size(); }
  double at(std::size_t row, std::size_t col) const {
    return data[row * shape.back() + col];
  }
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepInfo {
  std::int64_t sim_steps = 0;
  std::optional<std::int64_t> scheduled_job;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct WindowView {
  std::vector<const Job*> window;  // first W queued jobs, arrival order
  std::int64_t backlog = 0;        // queued jobs beyond the window
};

WindowView window_and_backlog(const Cluster& cluster, std::int64_t window);

// Sum of 1/t_e over running and queued jobs.
Rational slowdown_rate_all(const Cluster& cluster);
// Sum of 1/t_e over the queued jobs inside the window.
Rational slowdown_rate_window(const Cluster& cluster, std::int64_t window);

double reward_all_jobs(const Cluster& cluster);
double reward_window(const Cluster& cluster, std::int64_t window);

Observation encode_image(const Cluster& cluster, const EnvConfig& config);
Observation encode_compact(const Cluster& cluster, const EnvConfig& config);
Observation encode(const Cluster& cluster, const EnvConfig& config);

// The cluster simulator exposed as a reset/step decision process. Jobs come
// from a trace generated at reset (or supplied directly). The episode ends
// once the clock reaches T.
class SchedulingEnv {
 public:
  explicit SchedulingEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }

  // Empty cluster at clock 0 with arrivals drawn from the scenario workload.
  Observation reset(std::uint64_t seed);
  // Empty cluster at clock 0 replaying the given arrivals.
  Observation reset(Trace trace);

  StepResult step(std::int64_t action);

  bool done() const { return done_; }
  const Cluster& cluster() const { return cluster_; }
  const Trace& trace() const { return trace_; }
  Observation observation() const { return encode(cluster_, config_); }

  // True when some window job fits in the free processors.
  bool has_decision() const;

 private:
  double advance_once();

  EnvConfig config_;
  Cluster cluster_;
  Trace trace_;
  std::size_t next_arrival_ = 0;
  bool done_ = true;
};

}  // namespace rlsched
