#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "csp/transition.hpp"

namespace csp {

/// Rectangular gridworld. States are indexed row-major.
struct Grid {
  int width = 0;
  int height = 0;

  std::size_t state_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  StateIndex index(int row, int col) const noexcept {
    return static_cast<StateIndex>(row) * static_cast<StateIndex>(width) + static_cast<StateIndex>(col);
  }
  int row_of(StateIndex s) const noexcept { return static_cast<int>(s / static_cast<StateIndex>(width)); }
  int col_of(StateIndex s) const noexcept { return static_cast<int>(s % static_cast<StateIndex>(width)); }
  bool contains(StateIndex s) const noexcept { return s < state_count(); }

  bool operator==(const Grid&) const = default;
};

/// Sorted, duplicate-free list of blocked states.
using ObstacleSet = std::vector<StateIndex>;

/// Uniform mixture of {stay, up, down, left, right}. Moves that leave the grid
/// or enter an obstacle resolve to staying put. Obstacle cells keep their own
/// outgoing rows; their cost is handled by the LMDP cost matrix.
TransitionMatrix passive_dynamics(const Grid& grid, std::span<const StateIndex> obstacles);

/// K environments, each active on [starts[k], starts[k+1] - 1]; the last one
/// runs through the horizon. Environment indices are 0-based internally.
struct EnvironmentSchedule {
  std::vector<ObstacleSet> obstacles;
  std::vector<int> starts;
  int horizon = 0;

  std::size_t count() const noexcept { return starts.size(); }
  int start(std::size_t k) const { return starts.at(k); }
  /// First time step after period k (horizon + 1 for the last period).
  int end(std::size_t k) const { return k + 1 < starts.size() ? starts[k + 1] : horizon + 1; }
  int duration(std::size_t k) const { return end(k) - start(k); }
  bool blocked(std::size_t k, StateIndex s) const;
};

/// Checks every invariant and returns a normalized copy (obstacle sets sorted
/// and deduplicated). Throws SchemaError listing all violations.
EnvironmentSchedule validate_schedule(EnvironmentSchedule schedule, const Grid& grid);

/// Index of the environment active at absolute time t. Throws OutOfHorizon
/// when t is negative or beyond the horizon.
std::size_t active_environment(const EnvironmentSchedule& schedule, int t);

struct Deterministic {
  int time = 0;

  bool operator==(const Deterministic&) const = default;
};

struct DiscretePmf {
  std::vector<std::pair<int, double>> support;

  bool operator==(const DiscretePmf&) const = default;
};

/// Absolute-time deadline. Point masses use Deterministic so every consumer
/// has a single summation path.
using DeadlineDistribution = std::variant<Deterministic, DiscretePmf>;

/// Support of a deadline as (time, probability) pairs.
std::vector<std::pair<int, double>> deadline_support(const DeadlineDistribution& deadline);

/// Deadline satisfaction for an arrival at absolute time tau. Strict by
/// default (tau < deadline); inclusive admits tau == deadline.
constexpr bool meets_deadline(int tau, int deadline, bool inclusive) noexcept {
  return inclusive ? tau <= deadline : tau < deadline;
}

/// Last relative arrival offset from start that still meets the deadline.
/// Negative when nothing can.
constexpr int last_admissible_offset(int deadline, int start, bool inclusive) noexcept {
  return inclusive ? deadline - start : deadline - start - 1;
}

struct Goal {
  std::string label;
  StateIndex state = 0;
  DeadlineDistribution deadline = Deterministic{};
};

struct GoalSet {
  std::vector<Goal> goals;

  std::size_t size() const noexcept { return goals.size(); }
  const Goal& operator[](std::size_t c) const { return goals.at(c); }
  std::optional<std::size_t> find(std::string_view label) const;
  std::vector<std::string> labels() const;
};

/// Label uniqueness, grounding range, PMF normalization (1e-9) and support
/// within [0, horizon]. Throws SchemaError.
void validate_goals(const GoalSet& goals, const Grid& grid, int horizon);

}  // namespace csp
