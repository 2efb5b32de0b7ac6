#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "rlsched/env.hpp"

namespace rlsched {

inline constexpr const char* kProtocolVersion = "v1";

// Newline-delimited JSON front end for one SchedulingEnv.
//
// Requests:  {"op": "spec"|"reset"|"step"|"close", "id"?: int, "seed"?: int,
//             "action"?: int}
// Responses: {"id": int, "observation": [...], "shape": [...], "reward": x,
//             "done": bool, "info": {...}} or {"id": int, "error": "..."}.
// A request without an id gets the previous id plus one.
class ProtocolServer {
 public:
  explicit ProtocolServer(EnvConfig config);

  // Handles one request line; never throws for bad input.
  nlohmann::json handle(const std::string& line);
  bool closed() const { return closed_; }

 private:
  nlohmann::json dispatch(const nlohmann::json& request);

  SchedulingEnv env_;
  bool started_ = false;
  bool closed_ = false;
  std::int64_t last_id_ = 0;
};

nlohmann::json observation_json(const Observation& obs);

// Serves requests from in until "close" or end of input.
void serve(const EnvConfig& config, std::istream& in, std::ostream& out);

}  // namespace rlsched
