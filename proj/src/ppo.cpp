#include "rlsched/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "rlsched/errors.hpp"

namespace rlsched {

void PPOConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw ConfigError("clip_epsilon must be positive");
  if (n_steps == 0 || batch_size == 0 || surrogate_epochs == 0)
    throw ConfigError("n_steps, batch_size and surrogate_epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(reward_scale > 0.0)) throw ConfigError("reward_scale must be positive");
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double g = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    g = rewards[t] + gamma * g;
    out[t] = g;
  }
  return out;
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const bool> dones, double gamma, double lambda,
                        double bootstrap) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw ContractViolation("gae: rewards, values and dones differ in length");
  std::vector<double> adv(n);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? values[t + 1] : bootstrap;
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    running = delta + gamma * lambda * live * running;
    adv[t] = running;
  }
  return adv;
}

std::vector<double> gae(const Rollout& rollout, double gamma, double lambda) {
  std::vector<double> rewards, values;
  std::vector<char> done_bytes;
  for (const Transition& s : rollout.steps) {
    rewards.push_back(s.reward);
    values.push_back(s.value);
    done_bytes.push_back(s.done);
  }
  const std::unique_ptr<bool[]> dones(new bool[done_bytes.size()]);
  std::copy(done_bytes.begin(), done_bytes.end(), dones.get());
  return gae(rewards, values, std::span<const bool>(dones.get(), done_bytes.size()), gamma,
             lambda, rollout.bootstrap_value);
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

PPOLoss ppo_loss(const PolicyNetwork& net, std::span<const std::vector<double>> observations,
                 const PPOBatchTargets& targets, const PPOConfig& config,
                 std::span<double> grad) {
  const std::size_t n = observations.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double lo = 1.0 - config.clip_epsilon;
  const double hi = 1.0 + config.clip_epsilon;
  PPOLoss loss;

  const HeadLoss head = [&](std::size_t i, const PolicyNetwork::Output& out,
                            std::span<double> dlogits, double& dvalue) {
    const auto action = static_cast<std::size_t>(targets.actions[i]);
    const double adv = targets.advantages[i];
    const double log_prob = log_softmax_at(out.logits, action);
    const double log_ratio = log_prob - targets.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, lo, hi) * adv;
    const double surrogate = std::min(unclipped, clipped);
    // The clipped branch is constant in theta.
    const double dlogp = clipped < unclipped ? 0.0 : -adv * ratio * inv_n;

    const double h = entropy(out.probs);
    for (std::size_t k = 0; k < dlogits.size(); ++k) {
      const double p = out.probs[k];
      const double onehot = k == action ? 1.0 : 0.0;
      dlogits[k] = dlogp * (onehot - p);
      if (p > 0.0) dlogits[k] += config.entropy_coef * inv_n * p * (std::log(p) + h);
    }

    const double err = out.value - targets.returns[i];
    dvalue = 2.0 * config.value_coef * err * inv_n;

    loss.policy += -surrogate * inv_n;
    loss.value += err * err * inv_n;
    loss.entropy += h * inv_n;
    if (std::abs(ratio - 1.0) > config.clip_epsilon) loss.clip_fraction += inv_n;
    loss.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
    return -surrogate * inv_n + config.value_coef * err * err * inv_n -
           config.entropy_coef * h * inv_n;
  };

  loss.total = network_gradient(net, observations, head, grad);
  return loss;
}

namespace {

double global_norm(std::span<const double> g) {
  double s = 0.0;
  for (double x : g) s += x * x;
  return std::sqrt(s);
}

}  // namespace

UpdateDiagnostics ppo_update(PolicyNetwork& net, Adam& optimizer, const Rollout& rollout,
                             const PPOConfig& config, Rng& rng) {
  const std::size_t n = rollout.steps.size();
  if (n == 0) throw ContractViolation("ppo_update: empty rollout");
  const std::vector<double> advantages = gae(rollout, config.gamma, config.gae_lambda);
  std::vector<double> returns(n);
  for (std::size_t i = 0; i < n; ++i) returns[i] = advantages[i] + rollout.steps[i].value;

  const std::size_t batch = std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(net.parameter_count());
  UpdateDiagnostics diag;

  for (std::size_t epoch = 0; epoch < config.surrogate_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      std::vector<std::vector<double>> observations;
      PPOBatchTargets targets;
      for (std::size_t k = start; k < end; ++k) {
        const Transition& s = rollout.steps[order[k]];
        observations.push_back(s.observation);
        targets.actions.push_back(s.action);
        targets.old_log_probs.push_back(s.log_prob);
        targets.advantages.push_back(advantages[order[k]]);
        targets.returns.push_back(returns[order[k]]);
      }
      if (config.normalize_advantage && targets.advantages.size() > 1) {
        auto& a = targets.advantages;
        const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
        double var = 0.0;
        for (double x : a) var += (x - mean) * (x - mean);
        const double sd = std::sqrt(var / static_cast<double>(a.size() - 1));
        for (double& x : a) x = (x - mean) / (sd + 1e-8);
      }

      const PPOLoss loss = ppo_loss(net, observations, targets, config, grad);
      const double norm = global_norm(grad);
      if (!std::isfinite(loss.total) || !std::isfinite(norm)) {
        std::ostringstream dump;
        dump << "non-finite PPO loss: total=" << loss.total << " policy=" << loss.policy
             << " value=" << loss.value << " entropy=" << loss.entropy
             << " grad_norm=" << norm << " epoch=" << epoch << " minibatch_start=" << start
             << " param_norm=" << global_norm(net.parameters());
        throw TrainingError(dump.str());
      }
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm) {
        const double scale = config.max_grad_norm / norm;
        for (double& g : grad) g *= scale;
      }
      optimizer.step(net.parameters(), grad);

      diag.last = loss;
      diag.mean_policy_loss += loss.policy;
      diag.mean_value_loss += loss.value;
      diag.mean_entropy += loss.entropy;
      diag.max_grad_norm_seen = std::max(diag.max_grad_norm_seen, norm);
      ++diag.minibatches;
    }
  }
  const auto m = static_cast<double>(diag.minibatches);
  diag.mean_policy_loss /= m;
  diag.mean_value_loss /= m;
  diag.mean_entropy /= m;
  return diag;
}

std::int64_t sample_action(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<std::int64_t>(a);
  }
  return static_cast<std::int64_t>(probs.size()) - 1;
}

std::int64_t greedy_action(std::span<const double> probs) {
  return std::max_element(probs.begin(), probs.end()) - probs.begin();
}

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kActionStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kEpisodeStream = 4;

}  // namespace

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) {
  return derive_seed(derive_seed(seed, kEpisodeStream), episode);
}

TrainResult train(const EnvConfig& env_config, const PPOConfig& config, std::uint64_t seed,
                  const std::function<void(const CurvePoint&)>& on_update) {
  config.validate();
  if (config.total_steps < config.n_steps)
    throw ConfigError("total_steps must be at least n_steps");

  SchedulingEnv env(env_config);
  TrainResult result;
  result.network = PolicyNetwork::initialized(env_config.observation_size(),
                                              env_config.action_count(),
                                              derive_seed(seed, kInitStream));
  Adam optimizer(result.network.parameter_count(), config.learning_rate, config.adam_beta1,
                 config.adam_beta2, config.adam_eps);
  Rng action_rng(derive_seed(seed, kActionStream));
  Rng shuffle_rng(derive_seed(seed, kShuffleStream));

  std::uint64_t episode = 0;
  std::vector<double> obs = env.reset(episode_seed(seed, episode)).data;
  double episode_return = 0.0;
  const std::size_t updates = config.total_steps / config.n_steps;
  std::size_t agent_steps = 0;

  for (std::size_t u = 0; u < updates; ++u) {
    Rollout rollout;
    rollout.steps.reserve(config.n_steps);
    for (std::size_t k = 0; k < config.n_steps; ++k) {
      const auto out = result.network.forward(obs);
      Transition tr;
      tr.action = sample_action(out.probs, action_rng);
      tr.value = out.value;
      tr.log_prob = std::log(out.probs[static_cast<std::size_t>(tr.action)]);
      StepResult step = env.step(tr.action);
      tr.reward = step.reward * config.reward_scale;
      tr.done = step.done;
      tr.observation = std::move(obs);
      rollout.steps.push_back(std::move(tr));
      result.sim_steps += static_cast<std::size_t>(step.info.sim_steps);
      ++agent_steps;
      episode_return += step.reward;
      if (step.done) {
        result.episode_returns.push_back(episode_return);
        episode_return = 0.0;
        obs = env.reset(episode_seed(seed, ++episode)).data;
      } else {
        obs = std::move(step.observation.data);
      }
    }
    rollout.bootstrap_value =
        rollout.steps.back().done ? 0.0 : result.network.forward(obs).value;
    ppo_update(result.network, optimizer, rollout, config, shuffle_rng);
    ++result.updates;

    CurvePoint point;
    point.step = agent_steps;
    point.episodes = result.episode_returns.size();
    if (point.episodes == 0) {
      point.mean_return = episode_return;
    } else {
      const std::size_t window = std::min(point.episodes, kCurveWindow);
      point.mean_return = std::accumulate(result.episode_returns.end() -
                                              static_cast<std::ptrdiff_t>(window),
                                          result.episode_returns.end(), 0.0) /
                          static_cast<double>(window);
    }
    result.curve.push_back(point);
    if (on_update) on_update(point);
  }
  return result;
}

}  // namespace rlsched
