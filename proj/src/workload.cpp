#include "rlsched/workload.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "rlsched/errors.hpp"

namespace rlsched {

void WorkloadConfig::validate() const {
  if (!(new_job_rate >= 0.0 && new_job_rate <= 1.0))
    throw ConfigError("new_job_rate must lie in [0, 1]");
  if (!(small_job_chance >= 0.0 && small_job_chance <= 1.0))
    throw ConfigError("small_job_chance must lie in [0, 1]");
  if (max_length < 5) throw ConfigError("max job length d must be >= 5");
  if (max_size < 1) throw ConfigError("max job size j_s must be >= 1");
}

std::optional<Job> sample_step(const WorkloadConfig& config, Rng& rng, Time t,
                               std::int64_t id) {
  if (t < 1) throw ContractViolation("sample_step: t must be >= 1");
  const bool arrives = rng.bernoulli(config.new_job_rate);
  const bool small = rng.bernoulli(config.small_job_chance);
  const Time length = small ? rng.uniform_int(1, config.small_length_max())
                            : rng.uniform_int(config.large_length_min(),
                                              config.max_length);
  const std::int64_t procs = rng.uniform_int(config.size_min(), config.max_size);
  if (!arrives) return std::nullopt;
  Job job;
  job.id = id;
  job.t_s = t;
  job.t_e = length;
  job.procs = procs;
  return job;
}

Trace generate_trace(const WorkloadConfig& config, Time horizon) {
  config.validate();
  if (horizon < 1) throw ContractViolation("generate_trace: T must be >= 1");
  Trace trace;
  trace.horizon = horizon;
  trace.config = config;
  Rng rng(config.seed);
  std::int64_t next_id = 1;
  for (Time t = 1; t <= horizon; ++t) {
    if (auto job = sample_step(config, rng, t, next_id)) {
      trace.jobs.push_back(*job);
      ++next_id;
    }
  }
  return trace;
}

void save_trace(const Trace& trace, std::ostream& out) {
  out << "#trace v1 T=" << trace.horizon << " seed=" << trace.config.seed
      << '\n';
  for (const Job& j : trace.jobs)
    out << j.id << ' ' << j.t_s << ' ' << j.t_e << ' ' << j.procs << '\n';
}

namespace {

std::int64_t parse_keyed(const std::string& token, const std::string& key,
                         std::size_t line) {
  if (token.rfind(key + "=", 0) != 0)
    throw ParseError("expected '" + key + "=<int>' in header", line);
  try {
    std::size_t used = 0;
    const std::string value = token.substr(key.size() + 1);
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad integer in '" + token + "'", line);
  }
}

}  // namespace

Trace load_trace(std::istream& in) {
  Trace trace;
  std::string text;
  std::size_t line_no = 0;

  if (!std::getline(in, text)) throw ParseError("missing header", 1);
  ++line_no;
  {
    std::istringstream header(text);
    std::string tag, version, t_tok, seed_tok, extra;
    if (!(header >> tag >> version >> t_tok >> seed_tok) || tag != "#trace" ||
        version != "v1" || (header >> extra))
      throw ParseError("header must be '#trace v1 T=<int> seed=<int>'", line_no);
    trace.horizon = parse_keyed(t_tok, "T", line_no);
    trace.config.seed =
        static_cast<std::uint64_t>(parse_keyed(seed_tok, "seed", line_no));
  }

  std::set<std::int64_t> seen;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    std::istringstream row(text);
    Job job;
    std::string extra;
    if (!(row >> job.id >> job.t_s >> job.t_e >> job.procs) || (row >> extra))
      throw ParseError("expected '<id> <t_s> <t_e> <procs>'", line_no);
    if (job.t_e < 1 || job.procs < 1)
      throw ValidationError("line " + std::to_string(line_no) +
                            ": t_e and procs must be >= 1");
    if (job.t_s < 1 || job.t_s > trace.horizon)
      throw ValidationError("line " + std::to_string(line_no) +
                            ": t_s outside [1, T]");
    if (!trace.jobs.empty() && job.t_s < trace.jobs.back().t_s)
      throw ValidationError("line " + std::to_string(line_no) +
                            ": jobs not sorted by t_s");
    if (!seen.insert(job.id).second)
      throw ValidationError("duplicate job id " + std::to_string(job.id));
    trace.jobs.push_back(job);
  }
  return trace;
}

}  // namespace rlsched
