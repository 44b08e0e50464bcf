#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "csp/execution.hpp"
#include "csp/transition.hpp"
#include "csp/world.hpp"

namespace csp {

struct LmdpOptions {
  /// Desirability of an ordinary interior state, exp(-q). Must lie in (0, 1).
  double epsilon = 0.9;
  /// Fixed-point residual required over non-clamped states.
  double tolerance = 1e-12;
  /// 0 selects 100 * N.
  std::size_t max_iterations = 0;
};

/// Diagonal of the first-exit cost matrix: 0 on obstacles, 1 at the target,
/// epsilon elsewhere. Throws std::invalid_argument if the target is blocked or
/// epsilon is outside (0, 1).
std::vector<double> build_cost_matrix(StateIndex target, std::span<const StateIndex> obstacles,
                                      std::size_t state_count, double epsilon);

struct LmdpSolution {
  StateIndex target = 0;
  std::vector<double> z;
  /// Controlled dynamics u(x'|x) = p(x'|x) z(x') / G[z](x), absorbing at the target.
  TransitionMatrix u;
  /// Obstacles and states with G[z](x) = 0. Their rows are self-loops.
  std::vector<char> unreachable;
  double residual = 0.0;
  std::size_t iterations = 0;

  bool operator==(const LmdpSolution&) const = default;
};

/// Solves z = QPz with z clamped to 1 at the target and to 0 where Q is 0,
/// then forms the controlled dynamics. Throws NonConvergence when the residual
/// is not reached within the iteration cap.
LmdpSolution solve(std::span<const double> cost_diagonal, const TransitionMatrix& passive,
                   StateIndex target, const LmdpOptions& options = {});

/// All target slices for one obstacle set. Slices for blocked targets are empty.
struct EnvironmentPolicies {
  ObstacleSet obstacles;
  std::vector<std::optional<LmdpSolution>> slices;

  std::size_t valid_count() const;
  bool operator==(const EnvironmentPolicies&) const = default;
};

EnvironmentPolicies solve_environment(const Grid& grid, const ObstacleSet& obstacles,
                                      const LmdpOptions& options = {},
                                      Execution execution = Execution::Parallel);

/// One controlled-dynamics slice per (environment, target). Environments with
/// identical obstacle sets share the same solved slices.
class PolicyEnsemble {
 public:
  PolicyEnsemble() = default;
  PolicyEnsemble(std::vector<std::shared_ptr<const EnvironmentPolicies>> environments, double epsilon);

  std::size_t environment_count() const noexcept { return environments_.size(); }
  std::size_t state_count() const;
  double epsilon() const noexcept { return epsilon_; }
  std::size_t slice_count() const;

  /// nullptr when the target is blocked in environment k.
  const LmdpSolution* slice(std::size_t k, StateIndex target) const;
  const EnvironmentPolicies& environment(std::size_t k) const { return *environments_.at(k); }
  const std::shared_ptr<const EnvironmentPolicies>& shared_environment(std::size_t k) const {
    return environments_.at(k);
  }

 private:
  std::vector<std::shared_ptr<const EnvironmentPolicies>> environments_;
  double epsilon_ = 0.0;
};

/// Solves every (k, j) pair of a validated schedule. Errors from individual
/// slices are rethrown with the (k, j) context prepended.
PolicyEnsemble build_ensemble(const Grid& grid, const EnvironmentSchedule& schedule,
                              const LmdpOptions& options = {},
                              Execution execution = Execution::Parallel);

}  // namespace csp
