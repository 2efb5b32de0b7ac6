#include "rlsched/evaluation.hpp"

#include <fstream>

#include "rlsched/errors.hpp"
#include "rlsched/ppo.hpp"

namespace rlsched {

std::int64_t HeuristicPolicy::act(const SchedulingEnv& env, const Observation&) {
  const WindowView wb = window_and_backlog(env.cluster(), env.config().window);
  PolicyView view{wb.window, env.cluster().free_processors(), env.config().window};
  return rlsched::act(kind_, view, rng_);
}

void AgentPolicy::check_compatible(const EnvConfig& config) const {
  check_input_width(params_.network, config.observation_size());
  if (params_.network.action_count() != config.action_count())
    throw ShapeError("agent has " + std::to_string(params_.network.action_count()) +
                     " actions, environment has " + std::to_string(config.action_count()));
}

std::int64_t AgentPolicy::act(const SchedulingEnv&, const Observation& obs) {
  return greedy_action(params_.network.forward(obs.data).probs);
}

std::unique_ptr<Policy> make_policy(const std::string& spec) {
  if (spec.rfind("agent:", 0) == 0) {
    const std::string path = spec.substr(6);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
    return std::make_unique<AgentPolicy>(load_params(in), spec);
  }
  return std::make_unique<HeuristicPolicy>(parse_heuristic(spec));
}

EnvConfig agent_env(const ParamsMetadata& meta, EnvConfig base) {
  base.representation =
      meta.representation == "image" ? Representation::image : Representation::compact;
  base.window = meta.window;
  base.horizon = meta.horizon;
  return base;
}

EpisodeOutcome run_episode(SchedulingEnv& env, Policy& policy, const Observation& first) {
  EpisodeOutcome outcome;
  Observation obs = first;
  while (!env.done()) {
    StepResult step = env.step(policy.act(env, obs));
    outcome.total_reward += step.reward;
    ++outcome.agent_steps;
    obs = std::move(step.observation);
  }
  const auto& completed = env.cluster().completed();
  outcome.completed = completed.size();
  if (!completed.empty()) outcome.average_slowdown = to_double(average_slowdown(completed));
  return outcome;
}

namespace {
constexpr std::uint64_t kWorkloadStream = 11;
constexpr std::uint64_t kPolicyStream = 12;
}  // namespace

std::uint64_t evaluation_seed(std::uint64_t seed, std::uint64_t trial) {
  return derive_seed(derive_seed(seed, kWorkloadStream), trial);
}

namespace {

template <class Reset>
EvalReport run_trials(Policy& policy, const EnvConfig& config, std::size_t trials,
                      std::uint64_t seed, Reset reset) {
  policy.check_compatible(config);
  SchedulingEnv env(config);
  EvalReport report;
  report.scenario = config.scenario.id;
  report.policy = policy.name();
  report.env_spec = to_env_spec(config);
  report.trials = trials;
  report.seed = seed;
  for (std::size_t k = 0; k < trials; ++k) {
    policy.begin_episode(derive_seed(derive_seed(seed, kPolicyStream), k));
    const Observation first = reset(env, k);
    const EpisodeOutcome outcome = run_episode(env, policy, first);
    if (outcome.completed == 0) continue;
    report.slowdowns.push_back(outcome.average_slowdown);
  }
  report.valid_trials = report.slowdowns.size();
  if (!report.slowdowns.empty()) {
    report.mean_slowdown = mean(report.slowdowns);
    report.std_slowdown = stddev(report.slowdowns);
  }
  return report;
}

}  // namespace

EvalReport evaluate(Policy& policy, const EnvConfig& config, std::size_t trials,
                    std::uint64_t seed) {
  return run_trials(policy, config, trials, seed, [&](SchedulingEnv& env, std::size_t k) {
    return env.reset(evaluation_seed(seed, k));
  });
}

EvalReport evaluate(Policy& policy, const EnvConfig& config, std::span<const Trace> traces,
                    std::uint64_t seed) {
  return run_trials(policy, config, traces.size(), seed,
                    [&](SchedulingEnv& env, std::size_t k) { return env.reset(traces[k]); });
}

std::vector<PairwiseTest> pairwise_tests(std::span<const EvalReport> reports) {
  std::vector<PairwiseTest> tests;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      if (reports[i].scenario != reports[j].scenario) continue;
      PairwiseTest t{reports[i].scenario, reports[i].policy, reports[j].policy, {}};
      try {
        t.result = welch_t_test(reports[i].slowdowns, reports[j].slowdowns);
      } catch (const StatisticsError&) {
        t.result = WelchResult{};  // identical constant samples: no evidence
      }
      tests.push_back(t);
    }
  }
  return tests;
}

std::vector<TransferRow> transfer_matrix(const LoadedParams& agent, const EnvConfig& base,
                                         std::span<const int> scenarios, std::size_t trials,
                                         std::uint64_t seed,
                                         const std::map<int, LoadedParams>& specialists) {
  if (agent.meta.representation != "compact")
    throw ShapeError(
        "transfer needs a compact agent: image observations are H x (n_p(1+W)+1) wide, "
        "so an image network only fits clusters with the processor count it was trained on");
  std::vector<TransferRow> rows;
  for (int id : scenarios) {
    EnvConfig config = agent_env(agent.meta, base);
    config.scenario = scenario(id);
    TransferRow row;
    row.scenario = id;
    AgentPolicy transferred(agent, "transferred");
    row.transferred = evaluate(transferred, config, trials, seed);
    if (const auto it = specialists.find(id); it != specialists.end()) {
      AgentPolicy specialist(it->second, "specialist");
      row.specialist = evaluate(specialist, agent_env(it->second.meta, config), trials, seed);
      try {
        row.test = welch_t_test(row.transferred.slowdowns, row.specialist->slowdowns);
      } catch (const StatisticsError&) {
        row.test.reset();
      }
      row.transfer_better = row.transferred.mean_slowdown < row.specialist->mean_slowdown;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rlsched
