#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rlsched/rng.hpp"
#include "rlsched/workload.hpp"

namespace rlsched {

enum class HeuristicKind { random, fcfs, sjf, packer };

HeuristicKind parse_heuristic(std::string_view name);
std::string to_string(HeuristicKind kind);

// What a heuristic sees: the window in slot order and the free processors.
struct PolicyView {
  std::vector<const Job*> window;
  std::int64_t free_processors = 0;
  std::int64_t window_size = 10;  // W; the no-op action
};

// random: uniform over schedulable slots and the no-op.
// fcfs:   lowest schedulable slot.
// sjf:    schedulable slot with the smallest t_e.
// packer: schedulable slot with the largest procs.
// Ties go to the lower slot; with nothing schedulable every kind returns W.
// Only the random kind draws from rng (one draw per call).
std::int64_t act(HeuristicKind kind, const PolicyView& view, Rng& rng);

}  // namespace rlsched
