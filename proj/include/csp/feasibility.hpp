#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csp/execution.hpp"
#include "csp/reach.hpp"
#include "csp/world.hpp"

namespace csp {

/// Feasibility values kappa and selected intermediate targets j*, indexed by
/// (goal c, environment k, state i).
class FeasibilitySolution {
 public:
  static constexpr std::int64_t kNoTarget = -1;

  FeasibilitySolution() = default;
  FeasibilitySolution(std::size_t goals, std::size_t environments, std::size_t states);

  std::size_t goal_count() const noexcept { return goals_; }
  std::size_t environment_count() const noexcept { return environments_; }
  std::size_t state_count() const noexcept { return states_; }

  double kappa(std::size_t c, std::size_t k, StateIndex i) const { return kappa_[offset(c, k) + i]; }
  std::optional<StateIndex> target(std::size_t c, std::size_t k, StateIndex i) const;

  std::span<const double> kappa_slice(std::size_t c, std::size_t k) const {
    return {kappa_.data() + offset(c, k), states_};
  }
  std::span<double> kappa_slice(std::size_t c, std::size_t k) { return {kappa_.data() + offset(c, k), states_}; }
  std::span<std::int64_t> target_slice(std::size_t c, std::size_t k) {
    return {targets_.data() + offset(c, k), states_};
  }

  const std::vector<double>& kappa_values() const noexcept { return kappa_; }
  const std::vector<std::int64_t>& target_values() const noexcept { return targets_; }

  bool operator==(const FeasibilitySolution&) const = default;

 private:
  std::size_t offset(std::size_t c, std::size_t k) const { return (c * environments_ + k) * states_; }

  std::size_t goals_ = 0;
  std::size_t environments_ = 0;
  std::size_t states_ = 0;
  std::vector<double> kappa_;
  std::vector<std::int64_t> targets_;
};

/// Reachability Bellman recursion, k = K-1 down to 0 with kappa^K = 0:
///
///   kappa_g^k(i) = max_j [ r_goal(k, c, g, i)             if j == g
///                          r_det(k, j, duration(k), i) * kappa_g^{k+1}(j)  otherwise ]
///
/// j ranges over states not blocked in environment k; ties go to the lowest j
/// and a zero maximum leaves no target.
FeasibilitySolution backward_recursion(const ReachabilityTensor& reach, const EnvironmentSchedule& schedule,
                                       const GoalSet& goals, Execution execution = Execution::Parallel);

/// kappa slice for goal c in environment k, for export.
std::vector<double> feasibility_map(const FeasibilitySolution& solution, std::size_t c, std::size_t k);

}  // namespace csp
