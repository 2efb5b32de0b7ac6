#include "rlsched/scenarios.hpp"

#include <string>

#include "rlsched/errors.hpp"

namespace rlsched {

WorkloadConfig ScenarioConfig::workload(std::uint64_t seed) const {
  WorkloadConfig config;
  config.max_length = max_length;
  config.max_size = max_size;
  config.seed = seed;
  return config;
}

const std::array<ScenarioConfig, kScenarioCount>& all_scenarios() {
  static const std::array<ScenarioConfig, kScenarioCount> grid{{
      {1, 10, 15, 10},
      {2, 10, 48, 10},
      {3, 38, 15, 32},
      {4, 38, 33, 32},
      {5, 38, 48, 32},
      {6, 64, 15, 64},
      {7, 64, 33, 32},
      {8, 64, 33, 64},
      {9, 64, 48, 32},
      {10, 64, 48, 64},
  }};
  return grid;
}

const ScenarioConfig& scenario(int id) {
  if (id < 1 || id > kScenarioCount)
    throw ConfigError("scenario id must be in 1..10, got " + std::to_string(id));
  return all_scenarios()[static_cast<std::size_t>(id - 1)];
}

}  // namespace rlsched
