#include <doctest.h>

#include <sstream>

#include "rlsched/protocol.hpp"

using namespace rlsched;

namespace {

nlohmann::json roundtrip(ProtocolServer& server, const nlohmann::json& request) {
  // Through text in both directions, as a client would see it.
  return nlohmann::json::parse(server.handle(request.dump()).dump());
}

}  // namespace

TEST_CASE("spec") {
  ProtocolServer server(parse_env_spec("rep=compact,trans=dense,rew=all,W=10,H=20"));
  const auto r = roundtrip(server, {{"op", "spec"}, {"id", 1}});
  CHECK(r["version"] == "v1");
  CHECK(r["shape"] == nlohmann::json::array({121}));
  CHECK(r["actions"] == 11);
  CHECK(r["variant"]["rep"] == "compact");
  CHECK(r["id"] == 1);

  ProtocolServer image(parse_env_spec("rep=image,trans=sparse,rew=window,W=10,H=20"));
  const auto s = roundtrip(image, {{"op", "spec"}});
  CHECK(s["shape"] == nlohmann::json::array({20, 10 * 11 + 1}));
  CHECK(s["variant"]["trans"] == "sparse");
}

TEST_CASE("scripted episode matches the in-process trajectory bit-exactly") {
  for (const char* spec : {"rep=compact,trans=dense,rew=all,T=1000,scenario=3",
                           "rep=image,trans=sparse,rew=window,T=1000,scenario=1"}) {
    const EnvConfig config = parse_env_spec(spec);
    ProtocolServer server(config);
    SchedulingEnv native(config);

    const auto first = roundtrip(server, {{"op", "reset"}, {"seed", 2024}});
    const Observation obs0 = native.reset(2024);
    CHECK(first["observation"].get<std::vector<double>>() == obs0.data);

    Rng rng(5);
    std::size_t steps = 0;
    bool done = false;
    while (!done && steps < 1000) {
      const auto action = rng.uniform_int(0, config.window);
      const auto r = roundtrip(server, {{"op", "step"}, {"action", action}});
      const StepResult n = native.step(action);
      REQUIRE(r["observation"].get<std::vector<double>>() == n.observation.data);
      REQUIRE(r["reward"].get<double>() == n.reward);
      REQUIRE(r["done"].get<bool>() == n.done);
      REQUIRE(r["info"]["sim_steps"].get<std::int64_t>() == n.info.sim_steps);
      done = n.done;
      ++steps;
    }
    CHECK(steps >= 100);
    if (done) {
      const auto after = roundtrip(server, {{"op", "step"}, {"action", 0}});
      CHECK(after["error"] == "episode finished");
    }
  }
}

TEST_CASE("dense episode of 1000 steps") {
  const EnvConfig config = parse_env_spec("rep=compact,trans=dense,rew=all,T=1000");
  ProtocolServer server(config);
  roundtrip(server, {{"op", "reset"}, {"seed", 1}});
  std::size_t steps = 0;
  for (;; ++steps) {
    const auto r = roundtrip(server, {{"op", "step"}, {"action", config.window}});
    if (r["done"].get<bool>()) break;
  }
  CHECK(steps + 1 == 1000);
  CHECK(roundtrip(server, {{"op", "step"}, {"action", 0}})["error"] == "episode finished");
}

TEST_CASE("errors keep the session open") {
  ProtocolServer server(EnvConfig{});
  CHECK(roundtrip(server, {{"op", "step"}, {"action", 0}})["error"] ==
        "reset required before step");
  const auto bad = server.handle("{not json");
  CHECK(bad.contains("error"));
  CHECK(roundtrip(server, {{"op", "dance"}})["error"].get<std::string>().find("unknown op") !=
        std::string::npos);
  CHECK(server.handle("[1,2]").contains("error"));
  roundtrip(server, {{"op", "reset"}, {"seed", 3}});
  const auto invalid = roundtrip(server, {{"op", "step"}, {"action", 99}});
  CHECK(invalid.contains("error"));
  CHECK_FALSE(roundtrip(server, {{"op", "step"}, {"action", 0}}).contains("error"));
  CHECK_FALSE(server.closed());
}

TEST_CASE("ids") {
  ProtocolServer server(EnvConfig{});
  CHECK(roundtrip(server, {{"op", "spec"}})["id"] == 1);
  CHECK(roundtrip(server, {{"op", "spec"}, {"id", 10}})["id"] == 10);
  CHECK(roundtrip(server, {{"op", "spec"}})["id"] == 11);
  CHECK(server.handle("garbage")["id"] == 12);
}

TEST_CASE("serve over streams") {
  std::istringstream in(
      "{\"op\":\"spec\",\"id\":1}\n"
      "\n"
      "{\"op\":\"reset\",\"seed\":7,\"id\":2}\n"
      "{\"op\":\"step\",\"action\":10,\"id\":3}\n"
      "{\"op\":\"close\",\"id\":4}\n"
      "{\"op\":\"spec\",\"id\":5}\n");
  std::ostringstream out;
  serve(EnvConfig{}, in, out);
  std::istringstream lines(out.str());
  std::vector<nlohmann::json> responses;
  for (std::string line; std::getline(lines, line);) responses.push_back(nlohmann::json::parse(line));
  REQUIRE(responses.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(responses[i]["id"] == i + 1);
  CHECK(responses[3]["closed"] == true);

  SchedulingEnv native(EnvConfig{});
  native.reset(7);
  const StepResult s = native.step(10);
  CHECK(responses[2]["observation"].get<std::vector<double>>() == s.observation.data);
}
