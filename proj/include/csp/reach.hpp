#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "csp/arrival.hpp"
#include "csp/execution.hpp"
#include "csp/world.hpp"

namespace csp {

/// Pr(arrival from i meets the deadline | policy starts at start_time).
/// Discrete sum over the deadline support of p * F(last admissible offset).
double reach(const ArrivalModel& model, StateIndex i, int start_time, const DeadlineDistribution& deadline,
             CdfMode mode, bool inclusive = false);

/// Deadline that admits arrival at exactly end(k), the first step of the next
/// period: the state at end(k) is produced by the last transition of period k.
int period_end_deadline(const EnvironmentSchedule& schedule, std::size_t k, bool inclusive = false);

/// Relative horizon used for the end-of-period term of environment k.
inline int period_horizon(const EnvironmentSchedule& schedule, std::size_t k) { return schedule.duration(k); }

/// Deterministic-horizon slices r(i, j, t) = F_j(i, t) for one obstacle set,
/// t in [0, horizon]. In Exact mode these alias the arrival tables.
struct EnvironmentReach {
  std::vector<std::shared_ptr<const CdfTable>> tables;

  bool operator==(const EnvironmentReach& other) const;
};

EnvironmentReach build_environment_reach(const EnvironmentArrivals& arrivals, std::size_t states, int horizon,
                                         CdfMode mode, Execution execution = Execution::Parallel);

class ReachabilityTensor {
 public:
  ReachabilityTensor() = default;
  ReachabilityTensor(std::vector<std::shared_ptr<const EnvironmentReach>> deterministic, std::size_t states,
                     std::size_t goals, int horizon, std::vector<double> goal_values);

  std::size_t environment_count() const noexcept { return deterministic_.size(); }
  std::size_t state_count() const noexcept { return states_; }
  std::size_t goal_count() const noexcept { return goals_; }
  int horizon() const noexcept { return horizon_; }

  bool has_target(std::size_t k, StateIndex j) const;

  /// r_{i,j}^{k,t} with relative horizon t. Negative t gives 0; t beyond the
  /// horizon is clipped.
  double deterministic(std::size_t k, StateIndex j, int t, StateIndex i) const;
  /// Slice over i; empty when the target is blocked.
  std::span<const double> deterministic_slice(std::size_t k, StateIndex j, int t) const;

  /// r_{i,j}^{k, goal c}, anchored at the environment start.
  double goal(std::size_t k, std::size_t c, StateIndex j, StateIndex i) const {
    return goal_values_[((k * goals_ + c) * states_ + j) * states_ + i];
  }
  std::span<const double> goal_slice(std::size_t k, std::size_t c, StateIndex j) const {
    return {goal_values_.data() + ((k * goals_ + c) * states_ + j) * states_, states_};
  }

  const EnvironmentReach& environment(std::size_t k) const { return *deterministic_.at(k); }
  const std::shared_ptr<const EnvironmentReach>& shared_environment(std::size_t k) const {
    return deterministic_.at(k);
  }
  const std::vector<double>& goal_values() const noexcept { return goal_values_; }

 private:
  std::vector<std::shared_ptr<const EnvironmentReach>> deterministic_;
  std::size_t states_ = 0;
  std::size_t goals_ = 0;
  int horizon_ = 0;
  std::vector<double> goal_values_;
};

/// Goal slices are reach(model(k, j), i, d_k, goal deadline) for every
/// (k, c, j, i). Blocked targets give zero slices.
ReachabilityTensor build_tensor(const ArrivalSet& arrivals,
                                std::vector<std::shared_ptr<const EnvironmentReach>> deterministic,
                                const EnvironmentSchedule& schedule, const GoalSet& goals, CdfMode mode,
                                bool inclusive = false, Execution execution = Execution::Parallel);

/// Convenience overload that derives the deterministic slices itself.
ReachabilityTensor build_tensor(const ArrivalSet& arrivals, const EnvironmentSchedule& schedule,
                                const GoalSet& goals, CdfMode mode, bool inclusive = false,
                                Execution execution = Execution::Parallel);

}  // namespace csp
