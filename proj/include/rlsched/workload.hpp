#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rlsched/rng.hpp"

namespace rlsched {

using Time = std::int64_t;

// System state seen by a job when it was admitted to the wait queue.
struct SubmitSnapshot {
  std::int64_t queue_size = 0;      // jobs already waiting
  std::int64_t queued_work = 0;     // sum of procs * t_e over waiting jobs
  std::int64_t free_procs = 0;
  std::int64_t remaining_work = 0;  // sum of procs * remaining over running jobs
  friend bool operator==(const SubmitSnapshot&, const SubmitSnapshot&) = default;
};

struct Job {
  std::int64_t id = 0;
  Time t_s = 0;  // submission
  Time t_e = 1;  // execution length, also the requested time
  std::int64_t procs = 1;
  std::optional<Time> t_start;
  std::optional<Time> t_f;
  std::optional<SubmitSnapshot> snapshot;

  bool completed() const { return t_f.has_value(); }
  // t_f - (t_e + t_s); only meaningful once completed.
  Time wait_time() const { return *t_f - (t_e + t_s); }

  friend bool operator==(const Job&, const Job&) = default;
};

struct WorkloadConfig {
  double new_job_rate = 0.3;
  double small_job_chance = 0.8;
  std::int64_t max_length = 15;  // d
  std::int64_t max_size = 10;    // j_s
  std::uint64_t seed = 0;

  // Throws ConfigError when a field is out of range.
  void validate() const;

  // Integer bounds derived from d and j_s.
  std::int64_t small_length_max() const { return max_length / 5; }
  std::int64_t large_length_min() const { return (2 * max_length + 2) / 3; }
  std::int64_t size_min() const { return (max_size + 1) / 2; }
};

struct Trace {
  std::vector<Job> jobs;  // sorted by t_s, then id
  Time horizon = 0;
  WorkloadConfig config;

  bool empty() const { return jobs.empty(); }
};

// Every call consumes exactly four engine draws, in this order: arrival,
// small/large class, duration, processor demand. The draws are taken even
// when no job arrives, so the stream position depends only on t.
std::optional<Job> sample_step(const WorkloadConfig& config, Rng& rng, Time t,
                               std::int64_t id);

// Arrivals for t = 1..horizon from a generator seeded with config.seed.
Trace generate_trace(const WorkloadConfig& config, Time horizon);

// Text format:
//   #trace v1 T=<int> seed=<int>
//   <id> <t_s> <t_e> <procs>
void save_trace(const Trace& trace, std::ostream& out);
Trace load_trace(std::istream& in);

}  // namespace rlsched
