#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlsched/baselines.hpp"
#include "rlsched/env.hpp"
#include "rlsched/network.hpp"
#include "rlsched/stats.hpp"

namespace rlsched {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Throws ShapeError when the policy cannot read this environment.
  virtual void check_compatible(const EnvConfig&) const {}
  // Called before every episode with a policy-private seed.
  virtual void begin_episode(std::uint64_t) {}
  virtual std::int64_t act(const SchedulingEnv& env, const Observation& obs) = 0;
};

class HeuristicPolicy final : public Policy {
 public:
  explicit HeuristicPolicy(HeuristicKind kind) : kind_(kind) {}
  std::string name() const override { return to_string(kind_); }
  void begin_episode(std::uint64_t seed) override { rng_ = Rng(seed); }
  std::int64_t act(const SchedulingEnv& env, const Observation& obs) override;

 private:
  HeuristicKind kind_;
  Rng rng_;
};

// Acts greedily (most probable action) with a trained network.
class AgentPolicy final : public Policy {
 public:
  AgentPolicy(LoadedParams params, std::string name)
      : params_(std::move(params)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  void check_compatible(const EnvConfig& config) const override;
  std::int64_t act(const SchedulingEnv& env, const Observation& obs) override;
  const ParamsMetadata& meta() const { return params_.meta; }

 private:
  LoadedParams params_;
  std::string name_;
};

// "random", "fcfs", "sjf", "packer" or "agent:<params-file>".
std::unique_ptr<Policy> make_policy(const std::string& spec);

// Environment settings an agent was trained with, applied over base.
EnvConfig agent_env(const ParamsMetadata& meta, EnvConfig base);

struct EpisodeOutcome {
  double average_slowdown = 0.0;  // over jobs completed in the episode
  std::size_t completed = 0;
  double total_reward = 0.0;
  std::size_t agent_steps = 0;
};

EpisodeOutcome run_episode(SchedulingEnv& env, Policy& policy, const Observation& first);

// Workload seed for trial k of a report; independent of the policy.
std::uint64_t evaluation_seed(std::uint64_t seed, std::uint64_t trial);

struct EvalReport {
  int scenario = 0;
  std::string policy;
  std::string env_spec;
  std::size_t trials = 0;
  std::size_t valid_trials = 0;  // trials with at least one completed job
  double mean_slowdown = 0.0;
  double std_slowdown = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> slowdowns;  // per valid trial
};

EvalReport evaluate(Policy& policy, const EnvConfig& config, std::size_t trials,
                    std::uint64_t seed);
// Replays the given traces, one trial each.
EvalReport evaluate(Policy& policy, const EnvConfig& config, std::span<const Trace> traces,
                    std::uint64_t seed = 0);

struct PairwiseTest {
  int scenario = 0;
  std::string policy_a;
  std::string policy_b;
  WelchResult result;
};

// Welch tests between every pair of reports that share a scenario.
std::vector<PairwiseTest> pairwise_tests(std::span<const EvalReport> reports);

struct TransferRow {
  int scenario = 0;
  EvalReport transferred;
  std::optional<EvalReport> specialist;
  std::optional<WelchResult> test;
  bool transfer_better = false;  // lower mean slowdown than the specialist
};

// Evaluates one compact agent on each scenario without retraining. Throws
// ShapeError for image agents.
std::vector<TransferRow> transfer_matrix(const LoadedParams& agent, const EnvConfig& base,
                                         std::span<const int> scenarios, std::size_t trials,
                                         std::uint64_t seed,
                                         const std::map<int, LoadedParams>& specialists = {});

}  // namespace rlsched
