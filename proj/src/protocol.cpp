#include "rlsched/protocol.hpp"

#include <istream>
#include <ostream>

#include "rlsched/errors.hpp"

namespace rlsched {

ProtocolServer::ProtocolServer(EnvConfig config) : env_(std::move(config)) {}

nlohmann::json observation_json(const Observation& obs) {
  return {{"observation", obs.data}, {"shape", obs.shape}};
}

nlohmann::json ProtocolServer::handle(const std::string& line) {
  nlohmann::json request;
  std::int64_t id = last_id_ + 1;
  nlohmann::json response;
  try {
    request = nlohmann::json::parse(line);
    if (!request.is_object()) throw ConfigError("request must be a JSON object");
    if (request.contains("id")) id = request.at("id").get<std::int64_t>();
    response = dispatch(request);
  } catch (const nlohmann::json::exception& e) {
    response = {{"error", std::string("malformed request: ") + e.what()}};
  } catch (const std::exception& e) {
    response = {{"error", e.what()}};
  }
  last_id_ = id;
  response["id"] = id;
  return response;
}

nlohmann::json ProtocolServer::dispatch(const nlohmann::json& request) {
  const std::string op = request.at("op").get<std::string>();
  const EnvConfig& c = env_.config();
  if (op == "spec") {
    return {{"version", kProtocolVersion},
            {"shape", c.observation_shape()},
            {"actions", c.action_count()},
            {"variant",
             {{"rep", c.representation == Representation::image ? "image" : "compact"},
              {"trans", c.transitions == Transitions::dense ? "dense" : "sparse"},
              {"rew", c.reward_scope == RewardScope::all_jobs ? "all" : "window"},
              {"W", c.window},
              {"H", c.horizon},
              {"T", c.episode_length},
              {"scenario", c.scenario.id}}}};
  }
  if (op == "reset") {
    const auto seed = request.value("seed", std::uint64_t{0});
    nlohmann::json r = observation_json(env_.reset(seed));
    r["reward"] = 0.0;
    r["done"] = false;
    r["info"] = {{"sim_steps", 0}, {"scheduled_job", nullptr}, {"clock", 0}};
    started_ = true;
    return r;
  }
  if (op == "step") {
    if (!started_) return {{"error", "reset required before step"}};
    if (env_.done()) return {{"error", "episode finished"}};
    const auto action = request.at("action").get<std::int64_t>();
    const StepResult step = env_.step(action);
    nlohmann::json r = observation_json(step.observation);
    r["reward"] = step.reward;
    r["done"] = step.done;
    r["info"] = {{"sim_steps", step.info.sim_steps},
                 {"scheduled_job", step.info.scheduled_job
                                       ? nlohmann::json(*step.info.scheduled_job)
                                       : nlohmann::json(nullptr)},
                 {"clock", env_.cluster().clock()}};
    return r;
  }
  if (op == "close") {
    closed_ = true;
    return {{"closed", true}};
  }
  return {{"error", "unknown op '" + op + "'"}};
}

void serve(const EnvConfig& config, std::istream& in, std::ostream& out) {
  ProtocolServer server(config);
  std::string line;
  while (!server.closed() && std::getline(in, line)) {
    if (line.empty()) continue;
    out << server.handle(line).dump() << '\n' << std::flush;
  }
}

}  // namespace rlsched
