#include "rlsched/env.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "rlsched/errors.hpp"

namespace rlsched {

void EnvConfig::validate() const {
  if (window < 1) throw ConfigError("W must be >= 1");
  if (horizon < 1) throw ConfigError("H must be >= 1");
  if (episode_length < 1) throw ConfigError("T must be >= 1");
  if (backlog_view_cap < 0) throw ConfigError("backlog_view_cap must be >= 0");
}

std::size_t EnvConfig::image_width() const {
  const auto np = static_cast<std::size_t>(scenario.processors);
  return np * (1 + static_cast<std::size_t>(window)) + 1;
}

std::size_t EnvConfig::observation_size() const {
  const auto h = static_cast<std::size_t>(horizon);
  if (representation == Representation::image) return h * image_width();
  return 2 * h + 8 * static_cast<std::size_t>(window) + 1;
}

std::vector<std::size_t> EnvConfig::observation_shape() const {
  if (representation == Representation::image)
    return {static_cast<std::size_t>(horizon), image_width()};
  return {observation_size()};
}

namespace {

std::int64_t parse_int(std::string_view key, std::string_view value) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("env variant: '" + std::string(key) + "' needs an integer, got '" +
                      std::string(value) + "'");
  return out;
}

}  // namespace

EnvConfig parse_env_spec(std::string_view spec, EnvConfig config) {
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string_view item = spec.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) {
      if (comma == spec.size()) break;
      continue;
    }
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("env variant: expected key=value, got '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "rep") {
      if (value == "image") config.representation = Representation::image;
      else if (value == "compact") config.representation = Representation::compact;
      else throw ConfigError("env variant: rep must be image|compact");
    } else if (key == "trans") {
      if (value == "dense") config.transitions = Transitions::dense;
      else if (value == "sparse") config.transitions = Transitions::sparse;
      else throw ConfigError("env variant: trans must be dense|sparse");
    } else if (key == "rew") {
      if (value == "all") config.reward_scope = RewardScope::all_jobs;
      else if (value == "window") config.reward_scope = RewardScope::window;
      else throw ConfigError("env variant: rew must be all|window");
    } else if (key == "W") {
      config.window = parse_int(key, value);
    } else if (key == "H") {
      config.horizon = parse_int(key, value);
    } else if (key == "T") {
      config.episode_length = parse_int(key, value);
    } else if (key == "scenario") {
      config.scenario = scenario(static_cast<int>(parse_int(key, value)));
    } else if (key == "norm") {
      config.normalize = parse_int(key, value) != 0;
    } else {
      throw ConfigError("env variant: unknown key '" + std::string(key) + "'");
    }
  }
  config.validate();
  return config;
}

std::string to_env_spec(const EnvConfig& c) {
  std::ostringstream out;
  out << "rep=" << (c.representation == Representation::image ? "image" : "compact")
      << ",trans=" << (c.transitions == Transitions::dense ? "dense" : "sparse")
      << ",rew=" << (c.reward_scope == RewardScope::all_jobs ? "all" : "window")
      << ",W=" << c.window << ",H=" << c.horizon << ",T=" << c.episode_length;
  return out.str();
}

WindowView window_and_backlog(const Cluster& cluster, std::int64_t window) {
  WindowView view;
  const auto& queue = cluster.queue();
  const auto shown = std::min<std::size_t>(queue.size(), static_cast<std::size_t>(window));
  view.window.reserve(shown);
  for (std::size_t i = 0; i < shown; ++i) view.window.push_back(&queue[i]);
  view.backlog = static_cast<std::int64_t>(queue.size() - shown);
  return view;
}

Rational slowdown_rate_all(const Cluster& cluster) {
  Rational sum = 0;
  for (const RunningJob& r : cluster.running()) sum += Rational(1, r.job.t_e);
  for (const Job& j : cluster.queue()) sum += Rational(1, j.t_e);
  return sum;
}

Rational slowdown_rate_window(const Cluster& cluster, std::int64_t window) {
  Rational sum = 0;
  for (const Job* j : window_and_backlog(cluster, window).window)
    sum += Rational(1, j->t_e);
  return sum;
}

double reward_all_jobs(const Cluster& cluster) {
  double sum = 0.0;
  for (const RunningJob& r : cluster.running()) sum += 1.0 / static_cast<double>(r.job.t_e);
  for (const Job& j : cluster.queue()) sum += 1.0 / static_cast<double>(j.t_e);
  return -sum;
}

double reward_window(const Cluster& cluster, std::int64_t window) {
  double sum = 0.0;
  for (const Job* j : window_and_backlog(cluster, window).window)
    sum += 1.0 / static_cast<double>(j->t_e);
  return -sum;
}

Observation encode_image(const Cluster& cluster, const EnvConfig& config) {
  const auto rows = static_cast<std::size_t>(config.horizon);
  const std::size_t width = config.image_width();
  const auto np = static_cast<std::size_t>(cluster.processors());
  Observation obs;
  obs.shape = {rows, width};
  obs.data.assign(rows * width, 0.0);
  auto fill = [&](std::size_t col0, std::size_t cols, std::size_t height) {
    height = std::min(height, rows);
    for (std::size_t r = 0; r < height; ++r)
      std::fill_n(obs.data.begin() + static_cast<std::ptrdiff_t>(r * width + col0),
                  cols, 1.0);
  };

  std::size_t col = 0;
  for (const RunningJob& r : cluster.running()) {
    const auto procs = static_cast<std::size_t>(r.job.procs);
    fill(col, procs, static_cast<std::size_t>(r.remaining));
    col += procs;
  }

  const WindowView view = window_and_backlog(cluster, config.window);
  for (std::size_t i = 0; i < view.window.size(); ++i) {
    const Job& job = *view.window[i];
    fill(np + i * np, std::min(static_cast<std::size_t>(job.procs), np),
         static_cast<std::size_t>(job.t_e));
  }

  const std::int64_t cap =
      config.backlog_view_cap == 0 ? config.horizon
                                   : std::min(config.backlog_view_cap, config.horizon);
  fill(width - 1, 1, static_cast<std::size_t>(std::min(view.backlog, cap)));
  return obs;
}

Observation encode_compact(const Cluster& cluster, const EnvConfig& config) {
  Observation obs;
  obs.shape = {config.observation_size()};
  obs.data.reserve(obs.shape[0]);

  const double np = static_cast<double>(cluster.processors());
  const double T = static_cast<double>(config.episode_length);
  const double W = static_cast<double>(config.window);
  const bool norm = config.normalize;
  auto scaled = [norm](double v, double scale) { return norm ? v / scale : v; };

  for (const Usage& u : cluster.usage_profile(config.horizon).offsets) {
    obs.data.push_back(scaled(static_cast<double>(u.used), np));
    obs.data.push_back(scaled(static_cast<double>(u.free), np));
  }

  const WindowView view = window_and_backlog(cluster, config.window);
  for (std::int64_t i = 0; i < config.window; ++i) {
    if (static_cast<std::size_t>(i) >= view.window.size()) {
      obs.data.insert(obs.data.end(), 8, 0.0);
      continue;
    }
    const Job& job = *view.window[static_cast<std::size_t>(i)];
    const SubmitSnapshot snap = job.snapshot.value_or(SubmitSnapshot{});
    const auto backlog_then = std::max<std::int64_t>(0, snap.queue_size - config.window);
    const double d = static_cast<double>(config.scenario.max_length);
    obs.data.push_back(scaled(static_cast<double>(job.t_s), T));
    obs.data.push_back(scaled(static_cast<double>(job.t_e), d));
    obs.data.push_back(scaled(static_cast<double>(job.procs), np));
    obs.data.push_back(scaled(static_cast<double>(snap.queue_size), W));
    obs.data.push_back(scaled(static_cast<double>(snap.queued_work), np * T));
    obs.data.push_back(scaled(static_cast<double>(snap.free_procs), np));
    obs.data.push_back(scaled(static_cast<double>(snap.remaining_work), np * T));
    obs.data.push_back(scaled(static_cast<double>(backlog_then), W));
  }

  obs.data.push_back(scaled(static_cast<double>(view.backlog), W));
  return obs;
}

Observation encode(const Cluster& cluster, const EnvConfig& config) {
  return config.representation == Representation::image ? encode_image(cluster, config)
                                                        : encode_compact(cluster, config);
}

SchedulingEnv::SchedulingEnv(EnvConfig config)
    : config_(std::move(config)), cluster_(config_.scenario.processors) {
  config_.validate();
}

Observation SchedulingEnv::reset(std::uint64_t seed) {
  return reset(generate_trace(config_.scenario.workload(seed), config_.episode_length));
}

Observation SchedulingEnv::reset(Trace trace) {
  trace_ = std::move(trace);
  cluster_ = Cluster(config_.scenario.processors);
  next_arrival_ = 0;
  done_ = false;
  return observation();
}

bool SchedulingEnv::has_decision() const {
  const WindowView view = window_and_backlog(cluster_, config_.window);
  return std::any_of(view.window.begin(), view.window.end(),
                     [&](const Job* j) { return cluster_.fits(*j); });
}

double SchedulingEnv::advance_once() {
  const Time next = cluster_.clock() + 1;
  const std::size_t first = next_arrival_;
  while (next_arrival_ < trace_.jobs.size() && trace_.jobs[next_arrival_].t_s <= next) {
    if (trace_.jobs[next_arrival_].t_s < next)
      throw ContractViolation("trace job " + std::to_string(trace_.jobs[next_arrival_].id) +
                              " submitted before the current clock");
    ++next_arrival_;
  }
  cluster_.advance_time(std::span<const Job>(trace_.jobs.data() + first, next_arrival_ - first));
  return config_.reward_scope == RewardScope::all_jobs
             ? reward_all_jobs(cluster_)
             : reward_window(cluster_, config_.window);
}

StepResult SchedulingEnv::step(std::int64_t action) {
  if (done_) throw ContractViolation("step called on a finished episode");
  if (action < 0 || action > config_.window)
    throw InvalidAction("action " + std::to_string(action) + " outside [0, " +
                        std::to_string(config_.window) + "]");

  StepResult result;
  const WindowView view = window_and_backlog(cluster_, config_.window);
  const auto slot = static_cast<std::size_t>(action);
  const bool schedulable = action < config_.window && slot < view.window.size() &&
                           cluster_.fits(*view.window[slot]);
  if (schedulable) {
    const std::int64_t id = view.window[slot]->id;
    cluster_.schedule(id);
    result.info.scheduled_job = id;
  } else {
    result.reward += advance_once();
    ++result.info.sim_steps;
  }

  if (config_.transitions == Transitions::sparse) {
    // Skip states with nothing to decide; their rewards fold into this step.
    while (cluster_.clock() < config_.episode_length && !has_decision()) {
      result.reward += advance_once();
      ++result.info.sim_steps;
    }
  }

  done_ = cluster_.clock() >= config_.episode_length;
  result.done = done_;
  result.observation = observation();
  return result;
}

}  // namespace rlsched
