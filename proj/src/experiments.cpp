#include "rlsched/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "rlsched/errors.hpp"
#include "rlsched/stats.hpp"

namespace rlsched {

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("CSV lacks column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (c >= row.size()) throw FormatError("short CSV row in column '" + name + "'");
    double v = 0.0;
    const std::string& cell = row[c];
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw FormatError("non-numeric cell '" + cell + "' in column '" + name + "'");
    out.push_back(v);
  }
  return out;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_row(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split_row(line));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(const CsvTable& table, std::ostream& out) {
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_csv(table, out);
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

CsvTable curve_table(const std::vector<CurvePoint>& curve) {
  CsvTable t;
  t.header = {"step", "mean_return", "episodes"};
  for (const CurvePoint& p : curve)
    t.rows.push_back({std::to_string(p.step), format_number(p.mean_return),
                      std::to_string(p.episodes)});
  return t;
}

CurveBand aggregate_curves(const std::vector<std::vector<CurvePoint>>& curves) {
  CurveBand band;
  std::size_t length = 0;
  for (const auto& c : curves) length = std::max(length, c.size());
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<double> values;
    double step = 0.0;
    for (const auto& c : curves) {
      if (i >= c.size()) continue;
      values.push_back(c[i].mean_return);
      step = static_cast<double>(c[i].step);
    }
    band.step.push_back(step);
    band.mean.push_back(mean(values));
    band.std.push_back(stddev(values));
    band.n.push_back(values.size());
  }
  return band;
}

CsvTable band_table(const CurveBand& band) {
  CsvTable t;
  t.header = {"step", "mean", "std", "n"};
  for (std::size_t i = 0; i < band.step.size(); ++i)
    t.rows.push_back({format_number(band.step[i]), format_number(band.mean[i]),
                      format_number(band.std[i]), std::to_string(band.n[i])});
  return t;
}

ParamsMetadata params_metadata(const EnvConfig& config) {
  ParamsMetadata meta;
  meta.representation = config.representation == Representation::image ? "image" : "compact";
  meta.window = config.window;
  meta.horizon = config.horizon;
  meta.processors = config.scenario.processors;
  return meta;
}

namespace {

nlohmann::json ppo_json(const PPOConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"n_steps", c.n_steps},
          {"batch_size", c.batch_size},
          {"entropy_coef", c.entropy_coef},
          {"gae_lambda", c.gae_lambda},
          {"clip_epsilon", c.clip_epsilon},
          {"surrogate_epochs", c.surrogate_epochs},
          {"gamma", c.gamma},
          {"value_coef", c.value_coef},
          {"total_steps", c.total_steps},
          {"max_grad_norm", c.max_grad_norm},
          {"reward_scale", c.reward_scale},
          {"normalize_advantage", c.normalize_advantage}};
}

SeedOutcome train_one(const TrainingRequest& request, std::uint64_t seed) {
  SeedOutcome outcome;
  outcome.seed = seed;
  try {
    TrainResult result = train(request.env, request.ppo, seed);
    const std::string stem = request.tag + "_seed" + std::to_string(seed);
    const auto curve_path = request.out_dir / (stem + "_curve.csv");
    write_csv(curve_table(result.curve), curve_path);
    const auto params_path = request.out_dir / (stem + ".params");
    std::ofstream out(params_path, std::ios::binary);
    save_params(result.network, params_metadata(request.env), out);
    outcome.curve_file = curve_path;
    outcome.params_file = params_path;
    outcome.curve = std::move(result.curve);
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace

TrainingSummary run_training(const TrainingRequest& request) {
  std::filesystem::create_directories(request.out_dir);
  TrainingSummary summary;
  const std::size_t jobs = std::max<std::size_t>(1, request.jobs);
  for (std::size_t start = 0; start < request.seeds.size(); start += jobs) {
    std::vector<std::future<SeedOutcome>> running;
    const std::size_t end = std::min(start + jobs, request.seeds.size());
    for (std::size_t i = start; i < end; ++i)
      running.push_back(std::async(std::launch::async, train_one, std::cref(request),
                                   request.seeds[i]));
    for (auto& f : running) summary.seeds.push_back(f.get());
  }

  std::vector<std::vector<CurvePoint>> curves;
  for (const SeedOutcome& s : summary.seeds)
    if (s.error.empty()) curves.push_back(s.curve);
  if (!curves.empty()) {
    summary.aggregate_file = request.out_dir / (request.tag + "_aggregate.csv");
    write_csv(band_table(aggregate_curves(curves)), *summary.aggregate_file);
  }

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = "train";
  manifest["env"] = to_env_spec(request.env);
  manifest["scenario"] = request.env.scenario.id;
  manifest["ppo"] = ppo_json(request.ppo);
  manifest["seeds"] = request.seeds;
  manifest["results"] = nlohmann::json::array();
  for (const SeedOutcome& s : summary.seeds) {
    nlohmann::json r{{"seed", s.seed}, {"ok", s.error.empty()}};
    if (!s.error.empty()) r["error"] = s.error;
    if (s.curve_file) r["curve"] = s.curve_file->filename().string();
    if (s.params_file) r["params"] = s.params_file->filename().string();
    manifest["results"].push_back(r);
  }
  summary.manifest_file = request.out_dir / (request.tag + "_manifest.json");
  std::ofstream(summary.manifest_file) << manifest.dump(2) << '\n';
  return summary;
}

void write_eval_reports(const std::vector<EvalReport>& reports,
                        const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"scenario", "policy", "env", "trials", "valid_trials",
              "mean_slowdown", "std_slowdown", "seed"};
  for (const EvalReport& r : reports) {
    std::string env = r.env_spec;
    std::replace(env.begin(), env.end(), ',', ';');
    t.rows.push_back({std::to_string(r.scenario), r.policy, env, std::to_string(r.trials),
                      std::to_string(r.valid_trials), format_number(r.mean_slowdown),
                      format_number(r.std_slowdown), std::to_string(r.seed)});
  }
  write_csv(t, path);
}

void write_pairwise(const std::vector<PairwiseTest>& tests, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"scenario", "policy_a", "policy_b", "t", "dof", "p_value"};
  for (const PairwiseTest& p : tests)
    t.rows.push_back({std::to_string(p.scenario), p.policy_a, p.policy_b,
                      format_number(p.result.t), format_number(p.result.dof),
                      format_number(p.result.p)});
  write_csv(t, path);
}

void write_transfer(const std::vector<TransferRow>& rows, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"scenario", "transferred_mean", "transferred_std", "specialist_mean",
              "specialist_std", "p_value", "transfer_better"};
  for (const TransferRow& r : rows) {
    t.rows.push_back({std::to_string(r.scenario), format_number(r.transferred.mean_slowdown),
                      format_number(r.transferred.std_slowdown),
                      r.specialist ? format_number(r.specialist->mean_slowdown) : "",
                      r.specialist ? format_number(r.specialist->std_slowdown) : "",
                      r.test ? format_number(r.test->p) : "",
                      r.specialist ? (r.transfer_better ? "1" : "0") : ""});
  }
  write_csv(t, path);
}

TimingSample measure_training_time(const EnvConfig& env, const PPOConfig& ppo,
                                   std::uint64_t seed) {
  TimingSample sample;
  sample.variant = to_env_spec(env);
  sample.scenario = env.scenario.id;
  sample.horizon = env.horizon;
  sample.steps = ppo.total_steps;
  sample.input_width = env.observation_size();
  sample.parameters = PolicyNetwork::parameter_count(env.observation_size(), env.action_count());
  if (ppo.total_steps < ppo.n_steps) return sample;
  const auto start = std::chrono::steady_clock::now();
  train(env, ppo, seed);
  sample.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sample;
}

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

TimingComparison compare_horizon_scaling(int scenario_id, std::size_t steps,
                                         std::size_t repetitions, std::uint64_t seed) {
  if (repetitions == 0) throw ConfigError("timing needs at least one repetition");
  TimingComparison cmp;
  PPOConfig ppo;
  ppo.total_steps = steps;
  std::map<std::pair<Representation, std::int64_t>, std::vector<double>> times;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (Representation r : {Representation::compact, Representation::image}) {
      for (std::int64_t h : {20, 60}) {
        EnvConfig env;
        env.representation = r;
        env.transitions = Transitions::dense;
        env.reward_scope = RewardScope::all_jobs;
        env.horizon = h;
        env.scenario = scenario(scenario_id);
        TimingSample s = measure_training_time(env, ppo, seed + rep);
        times[{r, h}].push_back(s.seconds);
        cmp.samples.push_back(std::move(s));
      }
    }
  }
  auto ratio = [&](Representation r) {
    const double base = median(times[{r, 20}]);
    return base > 0.0 ? median(times[{r, 60}]) / base : 0.0;
  };
  cmp.compact_ratio = ratio(Representation::compact);
  cmp.image_ratio = ratio(Representation::image);
  cmp.ordinal_claim_holds = cmp.compact_ratio < cmp.image_ratio;
  return cmp;
}

}  // namespace rlsched
