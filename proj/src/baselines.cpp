#include "rlsched/baselines.hpp"

#include "rlsched/errors.hpp"

namespace rlsched {

HeuristicKind parse_heuristic(std::string_view name) {
  if (name == "random") return HeuristicKind::random;
  if (name == "fcfs") return HeuristicKind::fcfs;
  if (name == "sjf") return HeuristicKind::sjf;
  if (name == "packer" || name == "packer-largest-first") return HeuristicKind::packer;
  throw ConfigError("unknown heuristic '" + std::string(name) + "'");
}

std::string to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::random: return "random";
    case HeuristicKind::fcfs: return "fcfs";
    case HeuristicKind::sjf: return "sjf";
    case HeuristicKind::packer: return "packer";
  }
  return "?";
}

std::int64_t act(HeuristicKind kind, const PolicyView& view, Rng& rng) {
  std::vector<std::int64_t> candidates;
  for (std::size_t i = 0; i < view.window.size() && static_cast<std::int64_t>(i) < view.window_size; ++i)
    if (view.window[i]->procs <= view.free_processors)
      candidates.push_back(static_cast<std::int64_t>(i));

  const std::int64_t noop = view.window_size;
  switch (kind) {
    case HeuristicKind::random: {
      const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()));
      return pick == static_cast<std::int64_t>(candidates.size())
                 ? noop
                 : candidates[static_cast<std::size_t>(pick)];
    }
    case HeuristicKind::fcfs:
      return candidates.empty() ? noop : candidates.front();
    case HeuristicKind::sjf:
    case HeuristicKind::packer: {
      std::int64_t best = noop;
      for (std::int64_t slot : candidates) {
        if (best == noop) {
          best = slot;
          continue;
        }
        const Job& a = *view.window[static_cast<std::size_t>(slot)];
        const Job& b = *view.window[static_cast<std::size_t>(best)];
        const bool better = kind == HeuristicKind::sjf ? a.t_e < b.t_e : a.procs > b.procs;
        if (better) best = slot;
      }
      return best;
    }
  }
  return noop;
}

}  // namespace rlsched
