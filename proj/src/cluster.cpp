#include "rlsched/cluster.hpp"

#include <algorithm>
#include <string>

#include "rlsched/errors.hpp"

namespace rlsched {

Cluster::Cluster(std::int64_t processors) : processors_(processors) {
  if (processors < 1) throw ConfigError("cluster needs at least one processor");
}

std::size_t Cluster::queue_index(std::int64_t job_id) const {
  const auto it = std::find_if(queue_.begin(), queue_.end(),
                               [&](const Job& j) { return j.id == job_id; });
  if (it == queue_.end())
    throw ContractViolation("job " + std::to_string(job_id) + " is not queued");
  return static_cast<std::size_t>(it - queue_.begin());
}

bool Cluster::can_schedule(std::int64_t job_id) const {
  return fits(queue_[queue_index(job_id)]);
}

void Cluster::schedule(std::int64_t job_id) {
  const std::size_t index = queue_index(job_id);
  Job job = queue_[index];
  if (!fits(job))
    throw SchedulingError("job " + std::to_string(job_id) + " needs " +
                          std::to_string(job.procs) + " processors, " +
                          std::to_string(free_processors()) + " free");
  queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(index));
  job.t_start = clock_;
  used_ += job.procs;
  const Time length = job.t_e;
  running_.push_back({std::move(job), length});
}

void Cluster::advance_time(std::span<const Job> arrivals) {
  ++clock_;
  std::vector<RunningJob> still_running;
  still_running.reserve(running_.size());
  for (RunningJob& r : running_) {
    if (--r.remaining == 0) {
      r.job.t_f = clock_;
      used_ -= r.job.procs;
      completed_.push_back(std::move(r.job));
    } else {
      still_running.push_back(std::move(r));
    }
  }
  running_ = std::move(still_running);

  for (const Job& arrival : arrivals) {
    if (arrival.t_s != clock_)
      throw ContractViolation("arrival " + std::to_string(arrival.id) +
                              " has t_s " + std::to_string(arrival.t_s) +
                              ", clock is " + std::to_string(clock_));
    SubmitSnapshot snap;
    snap.queue_size = static_cast<std::int64_t>(queue_.size());
    for (const Job& q : queue_) snap.queued_work += q.procs * q.t_e;
    snap.free_procs = free_processors();
    for (const RunningJob& r : running_)
      snap.remaining_work += r.job.procs * r.remaining;
    Job admitted = arrival;
    admitted.t_start.reset();
    admitted.t_f.reset();
    admitted.snapshot = snap;
    queue_.push_back(std::move(admitted));
  }
}

UsageProfile Cluster::usage_profile(std::int64_t horizon) const {
  if (horizon < 1) throw ContractViolation("usage_profile: H must be >= 1");
  UsageProfile profile;
  profile.offsets.resize(static_cast<std::size_t>(horizon));
  for (const RunningJob& r : running_) {
    const auto rows = std::min(r.remaining, horizon);
    for (Time k = 0; k < rows; ++k)
      profile.offsets[static_cast<std::size_t>(k)].used += r.job.procs;
  }
  for (Usage& u : profile.offsets) u.free = processors_ - u.used;
  return profile;
}

Rational slowdown(const Job& job) {
  if (!job.completed())
    throw ContractViolation("slowdown of unfinished job " +
                            std::to_string(job.id));
  return Rational(*job.t_f - job.t_s, job.t_e);
}

Rational average_slowdown(std::span<const Job> jobs) {
  if (jobs.empty()) throw MetricError("average slowdown of no jobs");
  Rational sum = 0;
  for (const Job& j : jobs) sum += slowdown(j);
  return sum / static_cast<long long>(jobs.size());
}

}  // namespace rlsched
