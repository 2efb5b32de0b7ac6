// rlsched command line: train, eval, transfer, bench-time, plot, serve, trace.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlsched/errors.hpp"
#include "rlsched/evaluation.hpp"
#include "rlsched/experiments.hpp"
#include "rlsched/plot.hpp"
#include "rlsched/protocol.hpp"

using namespace rlsched;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFullSteps = 3'000'000;
constexpr std::size_t kFullTrials = 1000;
constexpr std::size_t kFullSeeds = 6;

struct EnvOptions {
  std::string spec;
  int scenario = 0;  // 0 keeps the variant's scenario
};

void add_env_options(CLI::App* cmd, EnvOptions& o) {
  cmd->add_option("--env", o.spec,
                  "environment variant, e.g. rep=compact,trans=sparse,rew=window,W=10,H=20");
  cmd->add_option("--scenario", o.scenario, "scenario id 1..10")->check(CLI::Range(1, 10));
}

EnvConfig make_env(const EnvOptions& o) {
  EnvConfig c = parse_env_spec(o.spec);
  if (o.scenario != 0) c.scenario = scenario(o.scenario);
  c.validate();
  return c;
}

// Options given to the running subcommand as a [cmd] config section; saved
// to a file they rerun the command with `rlsched --config <file>`.
std::string config_of(const CLI::App& cmd) {
  std::ostringstream out;
  out << '[' << cmd.get_name() << "]\n";
  auto quoted = [](const std::string& v) { return '"' + v + '"'; };
  for (const CLI::Option* opt : cmd.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || !opt->nonpositional()) continue;
    const std::vector<std::string> values = opt->results();
    if (values.empty()) continue;
    out << name << '=';
    if (opt->get_expected_max() > 1) {
      out << '[';
      for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << quoted(values[i]);
      out << ']';
    } else {
      out << quoted(values.front());
    }
    out << '\n';
  }
  return out.str();
}

void write_manifest(const CLI::App& cmd, const fs::path& path, nlohmann::json extra = {}) {
  nlohmann::json m = std::move(extra);
  m["version"] = kVersion;
  m["command"] = cmd.get_name();
  m["config"] = config_of(cmd);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["created"] = stamp;
  std::ofstream(path) << m.dump(2) << '\n';
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".manifest.json");
  return p;
}

LoadedParams read_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
  return load_params(in);
}

std::vector<int> scenario_list(const std::vector<int>& ids) {
  if (!ids.empty()) return ids;
  std::vector<int> all;
  for (const ScenarioConfig& s : all_scenarios()) all.push_back(s.id);
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster scheduling simulator and PPO workbench"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "read options from a key=value file");
  app.require_subcommand(1);

  // train
  EnvOptions train_env;
  PPOConfig ppo;
  std::vector<std::uint64_t> train_seeds{1};
  std::string train_out = "runs", train_tag;
  std::size_t train_jobs = 1;
  bool full_scale = false;
  auto* train = app.add_subcommand("train", "train PPO agents, one per seed");
  add_env_options(train, train_env);
  train->add_option("--seeds", train_seeds, "training seeds")->capture_default_str();
  train->add_option("--steps", ppo.total_steps, "agent decisions per seed")->capture_default_str();
  train->add_option("--out", train_out, "output directory")->capture_default_str();
  train->add_option("--tag", train_tag, "file name prefix (default: scenario and variant)");
  train->add_option("--jobs", train_jobs, "seeds trained concurrently")->capture_default_str();
  train->add_flag("--paper-scale", full_scale,
                  "3e6 steps and 6 seeds unless --steps/--seeds are given");
  train->add_option("--lr", ppo.learning_rate)->capture_default_str();
  train->add_option("--n-steps", ppo.n_steps)->capture_default_str();
  train->add_option("--batch-size", ppo.batch_size)->capture_default_str();
  train->add_option("--entropy-coef", ppo.entropy_coef)->capture_default_str();
  train->add_option("--gae-lambda", ppo.gae_lambda)->capture_default_str();
  train->add_option("--clip", ppo.clip_epsilon)->capture_default_str();
  train->add_option("--epochs", ppo.surrogate_epochs)->capture_default_str();
  train->add_option("--gamma", ppo.gamma)->capture_default_str();
  train->add_option("--value-coef", ppo.value_coef)->capture_default_str();
  train->add_option("--max-grad-norm", ppo.max_grad_norm, "0 disables clipping")
      ->capture_default_str();
  train->add_option("--reward-scale", ppo.reward_scale, "multiplier on rewards seen by PPO")
      ->capture_default_str();

  // eval
  EnvOptions eval_env;
  std::vector<std::string> eval_policies;
  std::vector<int> eval_scenarios;
  std::size_t eval_trials = 200;
  std::uint64_t eval_seed = 1;
  std::string eval_out = "eval.csv", eval_pairs;
  auto* eval = app.add_subcommand("eval", "evaluate policies on scenarios");
  add_env_options(eval, eval_env);
  eval->add_option("--policy", eval_policies, "random|fcfs|sjf|packer|agent:<params-file>")
      ->required();
  eval->add_option("--scenarios", eval_scenarios, "scenario ids (default: --scenario or all)");
  eval->add_option("--trials", eval_trials)->capture_default_str();
  eval->add_option("--seed", eval_seed)->capture_default_str();
  eval->add_option("--out", eval_out)->capture_default_str();
  eval->add_option("--pairwise", eval_pairs, "write Welch tests between policies here");
  eval->add_flag("--paper-scale", full_scale, "1000 trials");

  // transfer
  EnvOptions transfer_env;
  std::string transfer_params, transfer_out = "transfer.csv";
  std::vector<int> transfer_scenarios;
  std::vector<std::string> transfer_specialists;
  std::size_t transfer_trials = 200;
  std::uint64_t transfer_seed = 1;
  auto* transfer = app.add_subcommand("transfer", "evaluate one compact agent on many scenarios");
  add_env_options(transfer, transfer_env);
  transfer->add_option("--params", transfer_params, "compact agent parameter file")->required();
  transfer->add_option("--scenarios", transfer_scenarios, "scenario ids (default: all)");
  transfer->add_option("--specialist", transfer_specialists,
                       "<scenario>=<params-file> agent trained on that scenario");
  transfer->add_option("--trials", transfer_trials)->capture_default_str();
  transfer->add_option("--seed", transfer_seed)->capture_default_str();
  transfer->add_option("--out", transfer_out)->capture_default_str();
  transfer->add_flag("--paper-scale", full_scale, "1000 trials");

  // bench-time
  int bench_scenario = 6;
  std::size_t bench_steps = 2000, bench_reps = 3;
  std::uint64_t bench_seed = 1;
  std::string bench_out = "timing.csv";
  auto* bench = app.add_subcommand("bench-time", "training time at H=20 and H=60");
  bench->add_option("--scenario", bench_scenario)->check(CLI::Range(1, 10))->capture_default_str();
  bench->add_option("--steps", bench_steps)->capture_default_str();
  bench->add_option("--reps", bench_reps)->capture_default_str();
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench->add_option("--out", bench_out)->capture_default_str();

  // plot
  std::vector<std::string> plot_inputs;
  std::string plot_out = ".";
  auto* plot = app.add_subcommand("plot", "render curve and report CSVs as SVG");
  plot->add_option("inputs", plot_inputs, "CSV files")->required();
  plot->add_option("--out", plot_out, "output directory")->capture_default_str();

  // serve
  EnvOptions serve_env;
  std::string transport = "stdio";
  auto* serve_cmd = app.add_subcommand("serve", "JSON-lines environment server");
  add_env_options(serve_cmd, serve_env);
  serve_cmd->add_option("--transport", transport)->check(CLI::IsMember({"stdio"}))
      ->capture_default_str();

  // trace
  int trace_scenario = 1;
  std::uint64_t trace_seed = 1;
  Time trace_horizon = 100;
  std::string trace_out;
  auto* trace = app.add_subcommand("trace", "write a generated workload trace");
  trace->add_option("--scenario", trace_scenario)->check(CLI::Range(1, 10))->capture_default_str();
  trace->add_option("--seed", trace_seed)->capture_default_str();
  trace->add_option("--horizon", trace_horizon)->capture_default_str();
  trace->add_option("--out", trace_out, "file (default: stdout)");

  for (CLI::App* sub : app.get_subcommands({})) sub->configurable();
  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (full_scale) {
        if (train->count("--steps") == 0) ppo.total_steps = kFullSteps;
        if (train->count("--seeds") == 0) {
          train_seeds.clear();
          for (std::uint64_t s = 1; s <= kFullSeeds; ++s) train_seeds.push_back(s);
        }
      }
      TrainingRequest req;
      req.env = make_env(train_env);
      req.ppo = ppo;
      req.seeds = train_seeds;
      req.out_dir = train_out;
      req.jobs = train_jobs;
      req.tag = train_tag.empty() ? "s" + std::to_string(req.env.scenario.id) + "_" +
                                        (req.env.representation == Representation::image ? "image"
                                                                                         : "compact")
                                  : train_tag;
      fs::create_directories(req.out_dir);
      const TrainingSummary summary = run_training(req);
      int failed = 0;
      for (const SeedOutcome& s : summary.seeds) {
        if (s.error.empty()) {
          std::cout << "seed " << s.seed << ": " << s.params_file->string() << " ("
                    << s.curve.size() << " curve points, final mean return "
                    << (s.curve.empty() ? 0.0 : s.curve.back().mean_return) << ")\n";
        } else {
          std::cerr << "seed " << s.seed << " failed: " << s.error << '\n';
          ++failed;
        }
      }
      write_manifest(*train, req.out_dir / (req.tag + "_cli.manifest.json"),
                     {{"training_manifest", summary.manifest_file.string()}});
      return failed == 0 ? 0 : 1;
    }

    if (*eval) {
      if (full_scale && eval->count("--trials") == 0) eval_trials = kFullTrials;
      const EnvConfig base = make_env(eval_env);
      std::vector<int> ids = eval_scenarios;
      if (ids.empty()) ids = eval_env.scenario ? std::vector<int>{eval_env.scenario}
                                               : scenario_list({});
      std::vector<EvalReport> reports;
      for (int id : ids) {
        for (const std::string& spec : eval_policies) {
          auto policy = make_policy(spec);
          EnvConfig c = base;
          c.scenario = scenario(id);
          if (const auto* agent = dynamic_cast<const AgentPolicy*>(policy.get()))
            c = agent_env(agent->meta(), c);
          reports.push_back(evaluate(*policy, c, eval_trials, eval_seed));
          const EvalReport& r = reports.back();
          std::cout << "scenario " << id << ' ' << r.policy << ": mean slowdown "
                    << r.mean_slowdown << " (std " << r.std_slowdown << ", " << r.valid_trials
                    << "/" << r.trials << " trials)\n";
        }
      }
      write_eval_reports(reports, eval_out);
      if (!eval_pairs.empty()) write_pairwise(pairwise_tests(reports), eval_pairs);
      write_manifest(*eval, manifest_path(eval_out));
      return 0;
    }

    if (*transfer) {
      if (full_scale && transfer->count("--trials") == 0) transfer_trials = kFullTrials;
      const LoadedParams agent = read_params(transfer_params);
      std::map<int, LoadedParams> specialists;
      for (const std::string& s : transfer_specialists) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--specialist expects <scenario>=<file>");
        specialists.emplace(std::stoi(s.substr(0, eq)), read_params(s.substr(eq + 1)));
      }
      const std::vector<int> ids = scenario_list(transfer_scenarios);
      const auto rows = transfer_matrix(agent, make_env(transfer_env), ids, transfer_trials,
                                        transfer_seed, specialists);
      std::size_t compared = 0, better = 0;
      for (const TransferRow& r : rows) {
        std::cout << "scenario " << r.scenario << ": transferred " << r.transferred.mean_slowdown;
        if (r.specialist) {
          ++compared;
          better += r.transfer_better;
          std::cout << ", specialist " << r.specialist->mean_slowdown;
          if (r.test) std::cout << " (p=" << r.test->p << ")";
        }
        std::cout << '\n';
      }
      if (compared) std::cout << "transfer better in " << better << " of " << compared << '\n';
      write_transfer(rows, transfer_out);
      write_manifest(*transfer, manifest_path(transfer_out));
      return 0;
    }

    if (*bench) {
      const TimingComparison cmp =
          compare_horizon_scaling(bench_scenario, bench_steps, bench_reps, bench_seed);
      CsvTable t;
      t.header = {"variant", "scenario", "horizon", "steps", "input_width", "parameters",
                  "seconds"};
      for (const TimingSample& s : cmp.samples) {
        std::string v = s.variant;
        std::replace(v.begin(), v.end(), ',', ';');
        t.rows.push_back({v, std::to_string(s.scenario), std::to_string(s.horizon),
                          std::to_string(s.steps), std::to_string(s.input_width),
                          std::to_string(s.parameters), format_number(s.seconds)});
      }
      write_csv(t, fs::path(bench_out));
      std::cout << "H=60/H=20 time ratio: compact " << cmp.compact_ratio << ", image "
                << cmp.image_ratio << (cmp.ordinal_claim_holds ? " (compact scales better)\n"
                                                               : " (compact does not scale better)\n");
      write_manifest(*bench, manifest_path(bench_out),
                     {{"compact_ratio", cmp.compact_ratio}, {"image_ratio", cmp.image_ratio}});
      return 0;
    }

    if (*plot) {
      std::vector<fs::path> inputs(plot_inputs.begin(), plot_inputs.end());
      fs::create_directories(plot_out);
      for (const fs::path& p : emit_plots(inputs, plot_out)) std::cout << p.string() << '\n';
      return 0;
    }

    if (*serve_cmd) {
      std::ios::sync_with_stdio(false);
      serve(make_env(serve_env), std::cin, std::cout);
      return 0;
    }

    if (*trace) {
      const Trace t = generate_trace(scenario(trace_scenario).workload(trace_seed), trace_horizon);
      if (trace_out.empty()) {
        save_trace(t, std::cout);
      } else {
        std::ofstream out(trace_out);
        save_trace(t, out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
