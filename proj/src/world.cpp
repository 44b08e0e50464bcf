#include "csp/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "csp/error.hpp"

namespace csp {

namespace {

constexpr double kActionProbability = 1.0 / 5.0;

// stay, up, down, left, right
constexpr int kRowStep[5] = {0, -1, 1, 0, 0};
constexpr int kColStep[5] = {0, 0, 0, -1, 1};

}  // namespace

TransitionMatrix passive_dynamics(const Grid& grid, std::span<const StateIndex> obstacles) {
  const std::size_t n = grid.state_count();
  std::vector<char> blocked(n, 0);
  for (StateIndex s : obstacles) {
    if (s < n) blocked[s] = 1;
  }

  std::vector<std::vector<TransitionMatrix::Entry>> rows(n);
  for (StateIndex s = 0; s < n; ++s) {
    const int row = grid.row_of(s);
    const int col = grid.col_of(s);
    rows[s].reserve(5);
    for (int a = 0; a < 5; ++a) {
      const int r = row + kRowStep[a];
      const int c = col + kColStep[a];
      StateIndex next = s;
      if (r >= 0 && r < grid.height && c >= 0 && c < grid.width) {
        const StateIndex candidate = grid.index(r, c);
        if (!blocked[candidate]) next = candidate;
      }
      rows[s].push_back({next, kActionProbability});
    }
  }
  return TransitionMatrix(std::move(rows));
}

bool EnvironmentSchedule::blocked(std::size_t k, StateIndex s) const {
  const ObstacleSet& set = obstacles.at(k);
  return std::binary_search(set.begin(), set.end(), s);
}

EnvironmentSchedule validate_schedule(EnvironmentSchedule schedule, const Grid& grid) {
  std::vector<std::string> errors;

  if (grid.width <= 0 || grid.height <= 0) {
    errors.push_back("grid dimensions must be positive");
  } else if (grid.state_count() < 2) {
    errors.push_back("grid must have at least 2 states");
  }
  if (schedule.starts.empty()) errors.push_back("at least one environment is required");
  if (schedule.obstacles.size() != schedule.starts.size()) {
    errors.push_back("obstacle set count does not match environment count");
  }
  if (!schedule.starts.empty() && schedule.starts.front() != 0) errors.push_back("first environment must start at 0");
  for (std::size_t k = 1; k < schedule.starts.size(); ++k) {
    if (schedule.starts[k] <= schedule.starts[k - 1]) {
      errors.push_back("starts not strictly increasing at environment " + std::to_string(k + 1));
    }
  }
  if (!schedule.starts.empty() && schedule.horizon <= schedule.starts.back()) {
    errors.push_back("horizon must exceed the last environment start");
  }

  const std::size_t n = grid.width > 0 && grid.height > 0 ? grid.state_count() : 0;
  for (std::size_t k = 0; k < schedule.obstacles.size(); ++k) {
    ObstacleSet& set = schedule.obstacles[k];
    for (StateIndex s : set) {
      if (s >= n) {
        errors.push_back("state index out of range: obstacle " + std::to_string(s) + " in environment " +
                         std::to_string(k + 1));
      }
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }

  if (!errors.empty()) throw SchemaError(std::move(errors));
  return schedule;
}

std::size_t active_environment(const EnvironmentSchedule& schedule, int t) {
  if (t < 0 || t > schedule.horizon) {
    throw OutOfHorizon("time " + std::to_string(t) + " outside [0, " + std::to_string(schedule.horizon) + "]");
  }
  const auto it = std::upper_bound(schedule.starts.begin(), schedule.starts.end(), t);
  return static_cast<std::size_t>(std::distance(schedule.starts.begin(), it)) - 1;
}

std::vector<std::pair<int, double>> deadline_support(const DeadlineDistribution& deadline) {
  if (const auto* det = std::get_if<Deterministic>(&deadline)) return {{det->time, 1.0}};
  return std::get<DiscretePmf>(deadline).support;
}

std::optional<std::size_t> GoalSet::find(std::string_view label) const {
  for (std::size_t c = 0; c < goals.size(); ++c) {
    if (goals[c].label == label) return c;
  }
  return std::nullopt;
}

std::vector<std::string> GoalSet::labels() const {
  std::vector<std::string> out;
  out.reserve(goals.size());
  for (const Goal& g : goals) out.push_back(g.label);
  return out;
}

void validate_goals(const GoalSet& goals, const Grid& grid, int horizon) {
  std::vector<std::string> errors;
  std::set<std::string> seen;
  for (const Goal& g : goals.goals) {
    if (g.label.empty()) errors.push_back("goal label must be non-empty");
    if (!seen.insert(g.label).second) errors.push_back("duplicate goal label " + g.label);
    if (!grid.contains(g.state)) {
      errors.push_back("state index out of range: goal " + g.label + " grounded at " + std::to_string(g.state));
    }
    const auto support = deadline_support(g.deadline);
    if (support.empty()) errors.push_back("goal " + g.label + " has an empty deadline distribution");
    double total = 0.0;
    for (const auto& [t, p] : support) {
      if (t < 0 || t > horizon) {
        errors.push_back("goal " + g.label + " deadline time " + std::to_string(t) + " outside [0, horizon]");
      }
      if (!(p >= 0.0)) errors.push_back("goal " + g.label + " has a negative deadline probability");
      total += p;
    }
    if (!support.empty() && std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "goal " << g.label << " deadline probabilities sum to " << total;
      errors.push_back(os.str());
    }
  }
  if (!errors.empty()) throw SchemaError(std::move(errors));
}

SchemaError::SchemaError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "schema error";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

}  // namespace csp
