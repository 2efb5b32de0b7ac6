#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlsched/rational.hpp"
#include "rlsched/workload.hpp"

namespace rlsched {

struct RunningJob {
  Job job;
  Time remaining = 0;  // >= 1 while running
};

struct Usage {
  std::int64_t used = 0;
  std::int64_t free = 0;
  friend bool operator==(const Usage&, const Usage&) = default;
};

// Processor usage at offsets 0..H-1 from the current clock, assuming no
// further scheduling.
struct UsageProfile {
  std::vector<Usage> offsets;
  friend bool operator==(const UsageProfile&, const UsageProfile&) = default;
};

// Discrete-time batch cluster with fungible processors. Jobs run to
// completion without preemption. The wait queue keeps arrival order; jobs
// leave it only when scheduled.
class Cluster {
 public:
  explicit Cluster(std::int64_t processors);

  std::int64_t processors() const { return processors_; }
  Time clock() const { return clock_; }
  std::int64_t used_processors() const { return used_; }
  std::int64_t free_processors() const { return processors_ - used_; }

  // Running jobs in allocation order.
  const std::vector<RunningJob>& running() const { return running_; }
  const std::vector<Job>& queue() const { return queue_; }
  const std::vector<Job>& completed() const { return completed_; }

  // Throws ContractViolation when the id is not queued.
  bool can_schedule(std::int64_t job_id) const;
  bool fits(const Job& job) const { return job.procs <= free_processors(); }

  // Moves a queued job onto the processors at the current clock. Throws
  // SchedulingError when it does not fit and ContractViolation when the id is
  // not queued.
  void schedule(std::int64_t job_id);

  // Ticks the clock, retires jobs that reach zero remaining time, then admits
  // the arrivals (each must have t_s == new clock) to the tail of the queue,
  // recording their submission snapshot.
  void advance_time(std::span<const Job> arrivals = {});

  UsageProfile usage_profile(std::int64_t horizon) const;

 private:
  std::size_t queue_index(std::int64_t job_id) const;

  std::int64_t processors_;
  std::int64_t used_ = 0;
  Time clock_ = 0;
  std::vector<RunningJob> running_;
  std::vector<Job> queue_;
  std::vector<Job> completed_;
};

// (t_f - t_s) / t_e. Throws ContractViolation for unfinished jobs.
Rational slowdown(const Job& job);

// Exact mean slowdown. Throws MetricError on an empty list.
Rational average_slowdown(std::span<const Job> jobs);

}  // namespace rlsched
