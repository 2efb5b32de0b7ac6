#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rlsched/env.hpp"
#include "rlsched/network.hpp"
#include "rlsched/rng.hpp"

namespace rlsched {

struct PPOConfig {
  double learning_rate = 1e-4;
  std::size_t n_steps = 50;
  std::size_t batch_size = 64;
  double entropy_coef = 1e-2;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  std::size_t surrogate_epochs = 10;
  double gamma = 0.99;
  double value_coef = 0.5;
  std::size_t total_steps = 100'000;  // agent decisions, not clock ticks

  double max_grad_norm = 0.5;  // <= 0 disables clipping
  bool normalize_advantage = true;
  // Multiplies rewards seen by the learner; logged returns stay unscaled.
  double reward_scale = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-5;

  void validate() const;
};

struct Transition {
  std::vector<double> observation;
  std::int64_t action = 0;
  double reward = 0.0;    // reward that followed the action
  double value = 0.0;     // critic estimate for observation
  double log_prob = 0.0;  // behaviour log-probability of action
  bool done = false;      // the episode ended after this transition
};

struct Rollout {
  std::vector<Transition> steps;
  double bootstrap_value = 0.0;  // critic estimate after the last step
};

// G_t = R_{t+1} + gamma * G_{t+1}, with the last return equal to the last
// reward.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// Generalized advantage estimates. dones[t] cuts the recursion after step t;
// otherwise step t bootstraps from values[t + 1] (or `bootstrap` at the end).
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const bool> dones, double gamma, double lambda,
                        double bootstrap);
std::vector<double> gae(const Rollout& rollout, double gamma, double lambda);

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps_taken() const { return t_; }

 private:
  double lr_ = 1e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

struct PPOBatchTargets {
  std::vector<std::int64_t> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;  // already normalized if requested
  std::vector<double> returns;
};

struct PPOLoss {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Mean clipped-surrogate objective over a batch plus value_coef * MSE minus
// entropy_coef * entropy, and its exact parameter gradient.
PPOLoss ppo_loss(const PolicyNetwork& net, std::span<const std::vector<double>> observations,
                 const PPOBatchTargets& targets, const PPOConfig& config,
                 std::span<double> grad);

struct UpdateDiagnostics {
  PPOLoss last;
  double mean_policy_loss = 0.0;
  double mean_value_loss = 0.0;
  double mean_entropy = 0.0;
  double max_grad_norm_seen = 0.0;
  std::size_t minibatches = 0;
};

// surrogate_epochs passes over shuffled minibatches of the rollout.
// Throws TrainingError on a non-finite loss or gradient.
UpdateDiagnostics ppo_update(PolicyNetwork& net, Adam& optimizer, const Rollout& rollout,
                             const PPOConfig& config, Rng& rng);

std::int64_t sample_action(std::span<const double> probs, Rng& rng);
std::int64_t greedy_action(std::span<const double> probs);

struct CurvePoint {
  std::size_t step = 0;       // agent decisions so far
  double mean_return = 0.0;   // moving average over recent episodes
  std::size_t episodes = 0;   // completed episodes so far
};

struct TrainResult {
  PolicyNetwork network;
  std::vector<CurvePoint> curve;
  std::vector<double> episode_returns;
  std::size_t updates = 0;
  std::size_t sim_steps = 0;
};

inline constexpr std::size_t kCurveWindow = 100;

// Workload seed of the k-th training episode of a run.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode);

// Collect n_steps transitions, update, repeat until total_steps decisions.
TrainResult train(const EnvConfig& env_config, const PPOConfig& config, std::uint64_t seed,
                  const std::function<void(const CurvePoint&)>& on_update = {});

}  // namespace rlsched
