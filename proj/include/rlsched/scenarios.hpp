#pragma once

#include <array>
#include <cstdint>

#include "rlsched/workload.hpp"

namespace rlsched {

// One row of the cluster configuration grid.
struct ScenarioConfig {
  int id = 1;
  std::int64_t processors = 10;  // n_p
  std::int64_t max_length = 15;  // d
  std::int64_t max_size = 10;    // j_s

  // Workload with the stock arrival model for this row.
  WorkloadConfig workload(std::uint64_t seed) const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline constexpr int kScenarioCount = 10;

const std::array<ScenarioConfig, kScenarioCount>& all_scenarios();

// Throws ConfigError for ids outside 1..10.
const ScenarioConfig& scenario(int id);

}  // namespace rlsched
