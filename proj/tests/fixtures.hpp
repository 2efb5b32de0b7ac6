#pragma once

#include <vector>

#include "rlsched/env.hpp"
#include "rlsched/workload.hpp"

namespace rlsched::testing {

inline Job make_job(std::int64_t id, Time t_s, Time t_e, std::int64_t procs) {
  Job j;
  j.id = id;
  j.t_s = t_s;
  j.t_e = t_e;
  j.procs = procs;
  return j;
}

// Three single-processor jobs (green, orange, red) of lengths 2, 3, 4, all
// submitted at t = 1, on a two-processor cluster.
inline std::vector<Job> trio_jobs() {
  return {make_job(1, 1, 2, 1), make_job(2, 1, 3, 1), make_job(3, 1, 4, 1)};
}

inline Trace trio_trace(Time horizon = 10) {
  Trace t;
  t.horizon = horizon;
  t.jobs = trio_jobs();
  return t;
}

inline ScenarioConfig custom_scenario(std::int64_t processors, std::int64_t d = 15,
                                      std::int64_t js = 0) {
  return ScenarioConfig{0, processors, d, js ? js : processors};
}

// One 2-processor job with two steps left on a 3-processor cluster; queue
// holds a 1x5 job, a 3x4 job and one more job that lands in the backlog.
inline Trace reference_state_trace() {
  Trace t;
  t.horizon = 10;
  t.jobs = {make_job(1, 1, 2, 2), make_job(2, 1, 5, 1), make_job(3, 1, 4, 3),
            make_job(4, 1, 3, 1)};
  return t;
}

inline EnvConfig reference_state_config(Representation rep) {
  EnvConfig c;
  c.representation = rep;
  c.window = 2;
  c.horizon = 5;
  c.episode_length = 10;
  c.scenario = custom_scenario(3);
  return c;
}

// Env positioned at the reference state: clock 1, job 1 running.
inline SchedulingEnv reference_state_env(Representation rep) {
  SchedulingEnv env(reference_state_config(rep));
  env.reset(reference_state_trace());
  env.step(env.config().window);  // admit arrivals
  env.step(0);                    // start the 2-processor job
  return env;
}

}  // namespace rlsched::testing
