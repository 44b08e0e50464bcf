#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csp/execution.hpp"
#include "csp/synthesis.hpp"
#include "csp/tasklogic.hpp"

namespace csp {

struct Episode {
  std::uint64_t seed = 0;
  /// State at t = 0, 1, ...; ends at word completion or the horizon.
  std::vector<StateIndex> trajectory;
  std::vector<Certificate> certificates;
  /// Sampled deadline realization per goal (index = goal).
  std::vector<int> deadlines;
  bool success = false;
  std::size_t position = 0;

  bool operator==(const Episode&) const = default;
};

/// Executes the composite policy from start_state. The generator is
/// std::mt19937_64 seeded from the 64-bit seed, so a seed fully determines
/// the episode.
Episode rollout(const CompositePolicy& policy, StateIndex start_state, std::uint64_t seed);

nlohmann::json to_json(const Episode& episode);

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z);

struct LegStatistics {
  std::size_t certified = 0;
  double mean_arrival = 0.0;
  /// Certificate counts by absolute time.
  std::vector<std::size_t> arrival_counts;
};

struct MonteCarloOptions {
  std::size_t episodes = 1000;
  std::uint64_t base_seed = 0;
  double z = 1.96;
  bool keep_episodes = false;
  Execution execution = Execution::Parallel;
};

struct MonteCarloResult {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double z = 0.0;
  std::vector<LegStatistics> legs;
  std::vector<Episode> kept;
};

/// Episode e uses seed base_seed + e, so results do not depend on scheduling.
MonteCarloResult monte_carlo(const CompositePolicy& policy, StateIndex start_state,
                             const MonteCarloOptions& options);

nlohmann::json to_json(const MonteCarloResult& result);

}  // namespace csp
