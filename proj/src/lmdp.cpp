#include "csp/lmdp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <stdexcept>

#include "csp/error.hpp"

namespace csp {

std::vector<double> build_cost_matrix(StateIndex target, std::span<const StateIndex> obstacles,
                                      std::size_t state_count, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (target >= state_count) throw std::invalid_argument("target state out of range");
  std::vector<double> q(state_count, epsilon);
  for (StateIndex s : obstacles) {
    if (s == target) throw std::invalid_argument("target state " + std::to_string(target) + " is an obstacle");
    if (s < state_count) q[s] = 0.0;
  }
  q[target] = 1.0;
  return q;
}

LmdpSolution solve(std::span<const double> cost_diagonal, const TransitionMatrix& passive, StateIndex target,
                   const LmdpOptions& options) {
  const std::size_t n = passive.size();
  if (cost_diagonal.size() != n) throw std::invalid_argument("cost matrix size does not match passive dynamics");
  if (target >= n) throw std::invalid_argument("target state out of range");

  const std::size_t cap = options.max_iterations != 0 ? options.max_iterations : 100 * n;

  // States with no passive path to the target through non-obstacle states
  // have z = 0 exactly; everything else starts at z = 1 and decreases
  // monotonically to the first-exit fixed point.
  std::vector<char> connected(n, 0);
  {
    std::vector<std::vector<StateIndex>> incoming(n);
    for (StateIndex i = 0; i < n; ++i) {
      if (cost_diagonal[i] == 0.0) continue;
      for (const auto& e : passive.row(i)) {
        if (e.to != i && e.p > 0.0) incoming[e.to].push_back(i);
      }
    }
    std::vector<StateIndex> frontier{target};
    connected[target] = 1;
    while (!frontier.empty()) {
      const StateIndex y = frontier.back();
      frontier.pop_back();
      for (StateIndex x : incoming[y]) {
        if (!connected[x]) {
          connected[x] = 1;
          frontier.push_back(x);
        }
      }
    }
  }

  std::vector<double> z(n, 0.0);
  for (StateIndex i = 0; i < n; ++i) z[i] = connected[i] ? 1.0 : 0.0;
  std::vector<double> next = z;

  auto expected = [&](StateIndex i) {
    double g = 0.0;
    for (const auto& e : passive.row(i)) g += e.p * z[e.to];
    return g;
  };

  // Converged when every update is within tolerance relative to z, which
  // also bounds the absolute residual since z <= 1.
  double residual = 0.0;
  std::size_t iterations = 0;
  for (;;) {
    residual = 0.0;
    bool converged = true;
    for (StateIndex i = 0; i < n; ++i) {
      if (i == target || !connected[i]) continue;
      next[i] = cost_diagonal[i] * expected(i);
      const double diff = std::abs(next[i] - z[i]);
      residual = std::max(residual, diff);
      if (diff > options.tolerance * next[i]) converged = false;
    }
    if (converged) break;
    if (iterations == cap) {
      std::ostringstream os;
      os << "desirability iteration did not reach residual " << options.tolerance << " within " << cap
         << " iterations (residual " << residual << ")";
      throw NonConvergence(os.str());
    }
    z.swap(next);
    ++iterations;
  }

  LmdpSolution sol;
  sol.target = target;
  sol.residual = residual;
  sol.iterations = iterations;
  sol.unreachable.assign(n, 0);

  std::vector<std::vector<TransitionMatrix::Entry>> rows(n);
  for (StateIndex i = 0; i < n; ++i) {
    if (i == target) {
      rows[i].push_back({i, 1.0});
      continue;
    }
    const double g = expected(i);
    if (cost_diagonal[i] == 0.0 || g <= 0.0) {
      sol.unreachable[i] = 1;
      rows[i].push_back({i, 1.0});
      continue;
    }
    for (const auto& e : passive.row(i)) {
      if (z[e.to] > 0.0) rows[i].push_back({e.to, e.p * z[e.to] / g});
    }
  }
  sol.u = TransitionMatrix(std::move(rows));
  sol.z = std::move(z);
  return sol;
}

std::size_t EnvironmentPolicies::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(slices.begin(), slices.end(), [](const auto& s) { return s.has_value(); }));
}

EnvironmentPolicies solve_environment(const Grid& grid, const ObstacleSet& obstacles, const LmdpOptions& options,
                                      Execution execution) {
  const std::size_t n = grid.state_count();
  const TransitionMatrix passive = passive_dynamics(grid, obstacles);

  EnvironmentPolicies env;
  env.obstacles = obstacles;
  env.slices.resize(n);
  std::vector<std::exception_ptr> failures(n);

  auto solve_target = [&](StateIndex j) {
    if (std::binary_search(obstacles.begin(), obstacles.end(), j)) return;
    try {
      const auto q = build_cost_matrix(j, obstacles, n, options.epsilon);
      env.slices[j] = solve(q, passive, j, options);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(n);
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < count; ++j) solve_target(static_cast<StateIndex>(j));
  } else {
    for (std::ptrdiff_t j = 0; j < count; ++j) solve_target(static_cast<StateIndex>(j));
  }

  for (StateIndex j = 0; j < n; ++j) {
    if (!failures[j]) continue;
    try {
      std::rethrow_exception(failures[j]);
    } catch (const NonConvergence& e) {
      throw NonConvergence("target " + std::to_string(j) + ": " + e.what());
    }
  }
  return env;
}

PolicyEnsemble::PolicyEnsemble(std::vector<std::shared_ptr<const EnvironmentPolicies>> environments, double epsilon)
    : environments_(std::move(environments)), epsilon_(epsilon) {}

std::size_t PolicyEnsemble::state_count() const {
  return environments_.empty() ? 0 : environments_.front()->slices.size();
}

std::size_t PolicyEnsemble::slice_count() const {
  std::size_t total = 0;
  for (const auto& env : environments_) total += env->valid_count();
  return total;
}

const LmdpSolution* PolicyEnsemble::slice(std::size_t k, StateIndex target) const {
  const auto& slot = environments_.at(k)->slices.at(target);
  return slot ? &*slot : nullptr;
}

PolicyEnsemble build_ensemble(const Grid& grid, const EnvironmentSchedule& schedule, const LmdpOptions& options,
                              Execution execution) {
  std::map<ObstacleSet, std::shared_ptr<const EnvironmentPolicies>> solved;
  std::vector<std::shared_ptr<const EnvironmentPolicies>> environments;
  for (std::size_t k = 0; k < schedule.count(); ++k) {
    auto& slot = solved[schedule.obstacles[k]];
    if (!slot) {
      try {
        slot = std::make_shared<const EnvironmentPolicies>(
            solve_environment(grid, schedule.obstacles[k], options, execution));
      } catch (const NonConvergence& e) {
        throw NonConvergence("environment " + std::to_string(k + 1) + ", " + e.what());
      }
    }
    environments.push_back(slot);
  }
  return PolicyEnsemble(std::move(environments), options.epsilon);
}

}  // namespace csp
