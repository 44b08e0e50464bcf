#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "csp/world.hpp"

namespace csp {

/// Canonical CLI input: one JSON document.
///
///   {
///     "grid": {"width": 7, "height": 1},
///     "environments": [{"obstacles": [3], "start": 0}, {"obstacles": [], "start": 10}],
///     "horizon": 40,
///     "goals": [
///       {"label": "G1", "state": 2, "deadline": {"type": "det", "time": 10}},
///       {"label": "G2", "state": 6, "deadline": {"type": "pmf", "support": [[20, 0.5], [30, 0.5]]}}
///     ],
///     "task": "G1 > G2",
///     "start_state": 0
///   }
struct Scenario {
  Grid grid;
  EnvironmentSchedule schedule;
  GoalSet goals;
  std::string task;
  StateIndex start_state = 0;
};

/// Parses and validates. All schema problems are collected into one
/// SchemaError.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);
nlohmann::json to_json(const DeadlineDistribution& deadline);

/// Plan-time check: no goal referenced by the task sits inside any
/// environment's obstacle set, and the start state is not blocked at t = 0.
void validate_task_groundings(const Scenario& scenario, const std::vector<std::string>& task_labels);

}  // namespace csp
