#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "rlsched/baselines.hpp"
#include "rlsched/env.hpp"
#include "rlsched/errors.hpp"

using namespace rlsched;
using namespace rlsched::testing;

namespace {

EnvConfig config_for(Representation rep, Transitions trans, RewardScope rew, int scenario_id) {
  EnvConfig c;
  c.representation = rep;
  c.transitions = trans;
  c.reward_scope = rew;
  c.scenario = scenario(scenario_id);
  return c;
}

std::int64_t random_policy_action(const SchedulingEnv& env, Rng& rng) {
  const auto wb = window_and_backlog(env.cluster(), env.config().window);
  PolicyView view{wb.window, env.cluster().free_processors(), env.config().window};
  return act(HeuristicKind::random, view, rng);
}

std::size_t ones(const Observation& obs, std::size_t col0, std::size_t cols) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < obs.shape[0]; ++r)
    for (std::size_t c = col0; c < col0 + cols; ++c) n += obs.at(r, c) == 1.0;
  return n;
}

}  // namespace

TEST_CASE("env variant strings") {
  const EnvConfig c = parse_env_spec("rep=compact,trans=sparse,rew=window,W=10,H=60,T=100");
  CHECK(c.representation == Representation::compact);
  CHECK(c.transitions == Transitions::sparse);
  CHECK(c.reward_scope == RewardScope::window);
  CHECK(c.horizon == 60);
  CHECK(to_env_spec(c) == "rep=compact,trans=sparse,rew=window,W=10,H=60,T=100");
  const EnvConfig base = parse_env_spec("");
  CHECK(base.representation == Representation::image);
  CHECK(base.transitions == Transitions::dense);
  CHECK(base.reward_scope == RewardScope::all_jobs);
  CHECK_THROWS_AS(parse_env_spec("rep=video"), ConfigError);
  CHECK_THROWS_AS(parse_env_spec("W=0"), ConfigError);
  CHECK_THROWS_AS(parse_env_spec("H=abc"), ConfigError);
  CHECK_THROWS_AS(parse_env_spec("bogus=1"), ConfigError);
}

TEST_CASE("reset") {
  SUBCASE("compact empty state") {
    EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs, 3);
    SchedulingEnv env(c);
    const Observation obs = env.reset(1);
    REQUIRE(obs.size() == 121);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const bool free_entry = i < 40 && i % 2 == 1;
      CHECK(obs.data[i] == (free_entry ? 38.0 : 0.0));
    }
    CHECK(env.cluster().clock() == 0);
  }
  SUBCASE("image empty state") {
    for (int id = 1; id <= 10; ++id) {
      SchedulingEnv env(config_for(Representation::image, Transitions::dense, RewardScope::all_jobs, id));
      const Observation obs = env.reset(5);
      CHECK(std::all_of(obs.data.begin(), obs.data.end(), [](double v) { return v == 0.0; }));
      CHECK(obs.shape == std::vector<std::size_t>{20, env.config().image_width()});
    }
  }
  SUBCASE("same seed, same actions, same trajectory") {
    for (auto trans : {Transitions::dense, Transitions::sparse}) {
      SchedulingEnv a(config_for(Representation::compact, trans, RewardScope::all_jobs, 1));
      SchedulingEnv b(config_for(Representation::compact, trans, RewardScope::all_jobs, 1));
      CHECK(a.reset(77) == b.reset(77));
      Rng ra(3), rb(3);
      while (!a.done()) {
        const StepResult x = a.step(random_policy_action(a, ra));
        const StepResult y = b.step(random_policy_action(b, rb));
        REQUIRE(x.observation == y.observation);
        REQUIRE(x.reward == y.reward);
        REQUIRE(x.done == y.done);
      }
    }
  }
}

TEST_CASE("window_and_backlog") {
  SUBCASE("three queued jobs in a ten-slot window") {
    Cluster c(2);
    c.advance_time(trio_jobs());
    const WindowView v = window_and_backlog(c, 10);
    CHECK(v.window.size() == 3);
    CHECK(v.backlog == 0);
  }
  SUBCASE("two-slot window with three waiting jobs") {
    const SchedulingEnv env = reference_state_env(Representation::compact);
    const WindowView v = window_and_backlog(env.cluster(), 2);
    CHECK(v.window.size() == 2);
    CHECK(v.backlog == 1);
  }
  SUBCASE("window and backlog partition the queue") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs, 4);
      c.window = 1 + static_cast<std::int64_t>(seed % 7);
      SchedulingEnv env(c);
      env.reset(seed);
      Rng rng(seed);
      while (!env.done()) {
        const WindowView v = window_and_backlog(env.cluster(), c.window);
        const auto& q = env.cluster().queue();
        REQUIRE(v.window.size() + static_cast<std::size_t>(v.backlog) == q.size());
        for (std::size_t i = 0; i < v.window.size(); ++i) REQUIRE(v.window[i] == &q[i]);
        env.step(rng.bernoulli(0.3) ? 0 : c.window);
      }
    }
  }
}

TEST_CASE("encode_image") {
  SUBCASE("reference state") {
    const SchedulingEnv env = reference_state_env(Representation::image);
    const Observation obs = env.observation();
    REQUIRE(obs.shape == std::vector<std::size_t>{5, 10});
    // Cluster block: columns 0..2.
    CHECK(ones(obs, 0, 3) == 4);
    CHECK(obs.at(0, 0) == 1.0);
    CHECK(obs.at(0, 1) == 1.0);
    CHECK(obs.at(1, 0) == 1.0);
    CHECK(obs.at(1, 1) == 1.0);
    CHECK(obs.at(0, 2) == 0.0);
    // Slot 1: columns 3..5, a one-wide bar five tall.
    CHECK(ones(obs, 3, 3) == 5);
    for (std::size_t r = 0; r < 5; ++r) CHECK(obs.at(r, 3) == 1.0);
    // Slot 2: columns 6..8, three wide and four tall.
    CHECK(ones(obs, 6, 3) == 12);
    for (std::size_t c = 6; c < 9; ++c) {
      for (std::size_t r = 0; r < 4; ++r) CHECK(obs.at(r, c) == 1.0);
      CHECK(obs.at(4, c) == 0.0);
    }
    // Backlog column: one leading one.
    CHECK(obs.at(0, 9) == 1.0);
    CHECK(ones(obs, 9, 1) == 1);
  }
  SUBCASE("slot blocks hold min(t_e, H) x procs ones") {
    for (int id : {2, 5, 9}) {
      EnvConfig c = config_for(Representation::image, Transitions::dense, RewardScope::all_jobs, id);
      SchedulingEnv env(c);
      env.reset(static_cast<std::uint64_t>(id));
      Rng rng(id);
      const auto np = static_cast<std::size_t>(c.scenario.processors);
      while (!env.done()) {
        const Observation obs = env.observation();
        const WindowView v = window_and_backlog(env.cluster(), c.window);
        for (std::size_t i = 0; i < static_cast<std::size_t>(c.window); ++i) {
          const std::size_t expect =
              i < v.window.size()
                  ? static_cast<std::size_t>(std::min(v.window[i]->t_e, c.horizon) * v.window[i]->procs)
                  : 0;
          REQUIRE(ones(obs, np + i * np, np) == expect);
        }
        REQUIRE(ones(obs, 0, np) ==
                [&] {
                  std::size_t n = 0;
                  for (const auto& r : env.cluster().running())
                    n += static_cast<std::size_t>(std::min(r.remaining, c.horizon) * r.job.procs);
                  return n;
                }());
        REQUIRE(ones(obs, obs.shape[1] - 1, 1) ==
                static_cast<std::size_t>(std::min(v.backlog, c.horizon)));
        for (double x : obs.data) REQUIRE((x == 0.0 || x == 1.0));
        env.step(random_policy_action(env, rng));
      }
    }
  }
}

TEST_CASE("encode_compact") {
  SUBCASE("reference state cluster and backlog parts") {
    const SchedulingEnv env = reference_state_env(Representation::compact);
    const Observation obs = env.observation();
    REQUIRE(obs.size() == 2 * 5 + 8 * 2 + 1);
    const std::vector<double> cluster_part(obs.data.begin(), obs.data.begin() + 10);
    CHECK(cluster_part == std::vector<double>{2, 1, 2, 1, 0, 3, 0, 3, 0, 3});
    CHECK(obs.data.back() == 1.0);
    // Requested time and processors of the two window jobs.
    CHECK(obs.data[10 + 1] == 5.0);
    CHECK(obs.data[10 + 2] == 1.0);
    CHECK(obs.data[18 + 1] == 4.0);
    CHECK(obs.data[18 + 2] == 3.0);
  }
  SUBCASE("length is 2H + 8W + 1 for every processor count") {
    for (int id = 1; id <= 10; ++id) {
      for (std::int64_t h : {20, 60}) {
        EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs, id);
        c.horizon = h;
        SchedulingEnv env(c);
        CHECK(env.reset(1).size() == static_cast<std::size_t>(2 * h + 81));
        CHECK(c.observation_size() == static_cast<std::size_t>(2 * h + 81));
      }
    }
  }
  SUBCASE("slot features match an independent replay at submission time") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs,
                               1 + static_cast<int>(seed % 10));
      c.window = 3;  // small window so the backlog feature is exercised
      SchedulingEnv env(c);
      env.reset(seed);
      Rng rng(seed + 1);
      std::map<std::int64_t, Time> start;  // job id -> start clock
      struct Seen {
        Job job;
        std::vector<double> features;
      };
      std::vector<Seen> seen;
      while (!env.done()) {
        const Observation obs = env.observation();
        const WindowView v = window_and_backlog(env.cluster(), c.window);
        for (std::size_t i = 0; i < v.window.size(); ++i) {
          const auto at = obs.data.begin() + static_cast<std::ptrdiff_t>(2 * c.horizon + 8 * i);
          seen.push_back({*v.window[i], std::vector<double>(at, at + 8)});
        }
        const StepResult r = env.step(random_policy_action(env, rng));
        if (r.info.scheduled_job) start[*r.info.scheduled_job] = env.cluster().clock();
      }
      // Replay: a job admitted at clock s sees every job admitted before it
      // that had not started before s, and every job running across s.
      const auto& jobs = env.trace().jobs;
      for (const Seen& s : seen) {
        const Job& me = s.job;
        std::int64_t queue = 0, queued_work = 0, used = 0, remaining_work = 0;
        for (const Job& o : jobs) {
          const bool earlier = o.t_s < me.t_s || (o.t_s == me.t_s && o.id < me.id);
          if (!earlier) continue;
          const auto st = start.find(o.id);
          const bool waiting = st == start.end() || st->second >= me.t_s;
          if (waiting) {
            ++queue;
            queued_work += o.procs * o.t_e;
          } else if (st->second + o.t_e > me.t_s) {
            used += o.procs;
            remaining_work += o.procs * (st->second + o.t_e - me.t_s);
          }
        }
        const std::vector<double> expect{double(me.t_s),
                                         double(me.t_e),
                                         double(me.procs),
                                         double(queue),
                                         double(queued_work),
                                         double(c.scenario.processors - used),
                                         double(remaining_work),
                                         double(std::max<std::int64_t>(0, queue - c.window))};
        REQUIRE(s.features == expect);
      }
    }
  }
  SUBCASE("empty slots are zero and entries non-negative") {
    EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs, 7);
    SchedulingEnv env(c);
    env.reset(8);
    Rng rng(8);
    while (!env.done()) {
      const Observation obs = env.observation();
      const WindowView v = window_and_backlog(env.cluster(), c.window);
      for (double x : obs.data) REQUIRE(x >= 0.0);
      for (std::size_t i = v.window.size(); i < 10; ++i)
        for (std::size_t k = 0; k < 8; ++k) REQUIRE(obs.data[40 + 8 * i + k] == 0.0);
      env.step(random_policy_action(env, rng));
    }
  }
  SUBCASE("normalized features stay within [0, 1] for cluster pairs") {
    EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs, 6);
    c.normalize = true;
    SchedulingEnv env(c);
    const Observation obs = env.reset(2);
    CHECK(obs.data[1] == 1.0);
    CHECK(obs.data[0] == 0.0);
  }
}

TEST_CASE("rewards") {
  SUBCASE("empty system") {
    Cluster c(4);
    CHECK(reward_all_jobs(c) == 0.0);
    CHECK(reward_window(c, 10) == 0.0);
  }
  SUBCASE("three waiting jobs of lengths 2, 3, 4") {
    Cluster c(2);
    c.advance_time(trio_jobs());
    CHECK(slowdown_rate_all(c) == Rational(13, 12));
    CHECK(slowdown_rate_window(c, 10) == Rational(13, 12));
    CHECK(reward_all_jobs(c) == doctest::Approx(-13.0 / 12.0).epsilon(1e-15));
    CHECK(reward_window(c, 10) == doctest::Approx(-13.0 / 12.0).epsilon(1e-15));
  }
  SUBCASE("running jobs count only in the all-jobs scope") {
    Cluster c(3);
    c.advance_time(trio_jobs());
    for (int id : {1, 2, 3}) c.schedule(id);
    CHECK(reward_window(c, 10) == 0.0);
    CHECK(slowdown_rate_all(c) == Rational(13, 12));
  }
  SUBCASE("registry oracle and window bound on reachable states") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs,
                               1 + static_cast<int>(seed % 10));
      c.window = 4;
      SchedulingEnv env(c);
      env.reset(seed);
      Rng rng(seed);
      std::map<std::int64_t, Time> in_system;  // id -> t_e of jobs admitted, not finished
      std::size_t admitted = 0;
      while (!env.done()) {
        const StepResult r = env.step(random_policy_action(env, rng));
        const auto& jobs = env.trace().jobs;
        while (admitted < jobs.size() && jobs[admitted].t_s <= env.cluster().clock())
          in_system[jobs[admitted].id] = jobs[admitted].t_e, ++admitted;
        for (const Job& done : env.cluster().completed()) in_system.erase(done.id);
        Rational expect = 0;
        for (const auto& [id, te] : in_system) expect += Rational(1, te);
        REQUIRE(slowdown_rate_all(env.cluster()) == expect);
        REQUIRE(std::abs(reward_window(env.cluster(), 4)) <=
                std::abs(reward_all_jobs(env.cluster())) + 1e-12);
        if (r.info.sim_steps > 0) REQUIRE(r.reward == reward_all_jobs(env.cluster()));
      }
    }
  }
}

TEST_CASE("step, dense transitions") {
  EnvConfig c = config_for(Representation::compact, Transitions::dense, RewardScope::all_jobs, 1);
  c.scenario = custom_scenario(2);
  SUBCASE("scheduling the first two jobs is free; the no-op ticks the clock") {
    SchedulingEnv env(c);
    env.reset(trio_trace());
    const StepResult admit = env.step(c.window);
    CHECK(env.cluster().clock() == 1);
    CHECK(admit.reward == doctest::Approx(-13.0 / 12.0));
    CHECK(admit.info.sim_steps == 1);

    const StepResult r1 = env.step(0);
    CHECK(r1.reward == 0.0);
    CHECK(r1.info.sim_steps == 0);
    CHECK(r1.info.scheduled_job == 1);
    const StepResult r2 = env.step(0);
    CHECK(r2.reward == 0.0);
    CHECK(r2.info.scheduled_job == 2);
    CHECK(env.cluster().clock() == 1);

    const StepResult r3 = env.step(c.window);
    CHECK(env.cluster().clock() == 2);
    CHECK(r3.info.sim_steps == 1);
    CHECK_FALSE(r3.info.scheduled_job.has_value());
  }
  SUBCASE("invalid choices behave as the no-op") {
    SchedulingEnv env(c);
    env.reset(trio_trace());
    env.step(c.window);
    env.step(0);
    env.step(0);
    const StepResult r = env.step(0);  // red does not fit
    CHECK(r.info.sim_steps == 1);
    CHECK(env.cluster().clock() == 2);
    const StepResult empty_slot = env.step(5);
    CHECK(empty_slot.info.sim_steps == 1);
  }
  SUBCASE("no-op on an empty system") {
    SchedulingEnv env(c);
    env.reset(Trace{{}, 10, {}});
    const StepResult r = env.step(c.window);
    CHECK(r.reward == 0.0);
    CHECK(env.cluster().clock() == 1);
  }
  SUBCASE("errors") {
    c.episode_length = 2;
    SchedulingEnv env(c);
    env.reset(trio_trace(2));
    CHECK_THROWS_AS(env.step(-1), InvalidAction);
    CHECK_THROWS_AS(env.step(c.window + 1), InvalidAction);
    env.step(c.window);
    const StepResult last = env.step(c.window);
    CHECK(last.done);
    CHECK_THROWS_AS(env.step(0), ContractViolation);
  }
  SUBCASE("schedules never move the clock and episodes end at T") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      EnvConfig d = config_for(Representation::compact, Transitions::dense, RewardScope::window, 3);
      SchedulingEnv env(d);
      env.reset(seed);
      Rng rng(seed);
      std::size_t advances = 0, schedules = 0;
      while (!env.done()) {
        const Time before = env.cluster().clock();
        const StepResult r = env.step(random_policy_action(env, rng));
        if (r.info.scheduled_job) {
          ++schedules;
          REQUIRE(env.cluster().clock() == before);
          REQUIRE(r.reward == 0.0);
        } else {
          ++advances;
          REQUIRE(env.cluster().clock() == before + 1);
        }
      }
      CHECK(advances == 100);
      CHECK(schedules <= env.trace().jobs.size());
    }
  }
}

TEST_CASE("step, sparse transitions") {
  SUBCASE("a saturated cluster is skipped in one agent step") {
    EnvConfig c;
    c.representation = Representation::compact;
    c.transitions = Transitions::sparse;
    c.scenario = custom_scenario(2);
    c.episode_length = 20;
    for (Time k : {1, 3, 7}) {
      SchedulingEnv env(c);
      Trace t;
      t.horizon = 20;
      t.jobs = {make_job(1, 1, k, 2), make_job(2, 1, 1, 1)};
      env.reset(t);
      const StepResult admit = env.step(c.window);
      CHECK(admit.info.sim_steps == 1);
      const StepResult busy = env.step(0);
      CHECK(busy.info.scheduled_job == 1);
      CHECK(busy.info.sim_steps == k);
      CHECK(env.cluster().clock() == 1 + k);
      CHECK(env.has_decision());
    }
  }
  SUBCASE("idle stretches end at T") {
    EnvConfig c;
    c.representation = Representation::compact;
    c.transitions = Transitions::sparse;
    c.episode_length = 30;
    SchedulingEnv env(c);
    env.reset(Trace{{}, 30, {}});
    const StepResult r = env.step(0);
    CHECK(r.done);
    CHECK(r.info.sim_steps == 30);
    CHECK(r.reward == 0.0);
  }
}

TEST_CASE("sparse decisions replayed densely give the same rewards") {
  Rng pick(31);
  std::size_t sparse_steps = 0;
  for (int episode = 0; episode < 40; ++episode) {
    EnvConfig c;
    c.transitions = Transitions::sparse;
    c.reward_scope = episode % 2 ? RewardScope::window : RewardScope::all_jobs;
    c.representation = Representation::compact;
    c.scenario = scenario(1 + static_cast<int>(pick.uniform_int(0, 9)));
    EnvConfig d = c;
    d.transitions = Transitions::dense;
    SchedulingEnv sparse(c), dense(d);
    sparse.reset(500 + episode);
    dense.reset(500 + episode);
    double sparse_total = 0.0, dense_total = 0.0;
    while (!sparse.done()) {
      const auto action = pick.uniform_int(0, c.window);
      const StepResult s = sparse.step(action);
      ++sparse_steps;
      if (!s.done) REQUIRE(sparse.has_decision());
      sparse_total += s.reward;
      StepResult r = dense.step(action);
      double chunk = r.reward;
      const std::int64_t extra = s.info.sim_steps - (s.info.scheduled_job ? 0 : 1);
      for (std::int64_t k = 0; k < extra; ++k) chunk += dense.step(c.window).reward;
      CHECK(std::abs(chunk - s.reward) <= 1e-9);
      dense_total += chunk;
      REQUIRE(dense.cluster().clock() == sparse.cluster().clock());
    }
    CHECK(dense.done());
    CHECK(std::abs(dense_total - sparse_total) <= 1e-9);
  }
  CHECK(sparse_steps > 1000);
}
