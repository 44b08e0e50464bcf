#include "csp/feasibility.hpp"

#include <stdexcept>
#include <utility>

namespace csp {

FeasibilitySolution::FeasibilitySolution(std::size_t goals, std::size_t environments, std::size_t states)
    : goals_(goals),
      environments_(environments),
      states_(states),
      kappa_(goals * environments * states, 0.0),
      targets_(goals * environments * states, kNoTarget) {}

std::optional<StateIndex> FeasibilitySolution::target(std::size_t c, std::size_t k, StateIndex i) const {
  const std::int64_t j = targets_[offset(c, k) + i];
  if (j == kNoTarget) return std::nullopt;
  return static_cast<StateIndex>(j);
}

namespace {

// One backup for every state of (goal c, environment k). `next` is
// kappa_c^{k+1}, or empty for the last environment.
void backup(const ReachabilityTensor& reach, const EnvironmentSchedule& schedule, StateIndex goal_state,
            std::size_t c, std::size_t k, std::span<const double> next, StateIndex i, double& kappa_out,
            std::int64_t& target_out) {
  const std::size_t n = reach.state_count();
  const int horizon = period_horizon(schedule, k);
  double best = 0.0;
  std::int64_t best_j = FeasibilitySolution::kNoTarget;
  for (StateIndex j = 0; j < n; ++j) {
    if (!reach.has_target(k, j)) continue;
    double score;
    if (j == goal_state) {
      score = reach.goal(k, c, j, i);
    } else {
      if (next.empty() || next[j] == 0.0) continue;
      score = reach.deterministic(k, j, horizon, i) * next[j];
    }
    if (score > best) {
      best = score;
      best_j = static_cast<std::int64_t>(j);
    }
  }
  kappa_out = best;
  target_out = best_j;
}

}  // namespace

FeasibilitySolution backward_recursion(const ReachabilityTensor& reach, const EnvironmentSchedule& schedule,
                                       const GoalSet& goals, Execution execution) {
  const std::size_t envs = schedule.count();
  const std::size_t n = reach.state_count();
  const std::size_t goal_count = goals.size();
  if (reach.environment_count() != envs || reach.goal_count() != goal_count) {
    throw std::invalid_argument("reachability tensor does not match schedule/goals");
  }

  FeasibilitySolution sol(goal_count, envs, n);
  for (std::size_t step = 0; step < envs; ++step) {
    const std::size_t k = envs - 1 - step;
    // Goals and states are independent within one environment step.
    const auto work = static_cast<std::ptrdiff_t>(goal_count * n);
    auto run = [&](std::ptrdiff_t flat) {
      const std::size_t c = static_cast<std::size_t>(flat) / n;
      const StateIndex i = static_cast<std::size_t>(flat) % n;
      std::span<const double> next;
      if (k + 1 < envs) next = std::as_const(sol).kappa_slice(c, k + 1);
      backup(reach, schedule, goals[c].state, c, k, next, i, sol.kappa_slice(c, k)[i], sol.target_slice(c, k)[i]);
    };
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t w = 0; w < work; ++w) run(w);
    } else {
      for (std::ptrdiff_t w = 0; w < work; ++w) run(w);
    }
  }
  return sol;
}

std::vector<double> feasibility_map(const FeasibilitySolution& solution, std::size_t c, std::size_t k) {
  const auto slice = solution.kappa_slice(c, k);
  return {slice.begin(), slice.end()};
}

}  // namespace csp
