#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "csp/pipeline.hpp"
#include "csp/scenario.hpp"

namespace csp::testing {

inline Scenario corridor_scenario(int length, std::vector<ObstacleSet> obstacles, std::vector<int> starts, int horizon,
                                  std::vector<Goal> goals, std::string task, StateIndex start = 0) {
  Scenario sc;
  sc.grid = {length, 1};
  sc.schedule.obstacles = std::move(obstacles);
  sc.schedule.starts = std::move(starts);
  sc.schedule.horizon = horizon;
  sc.schedule = validate_schedule(sc.schedule, sc.grid);
  sc.goals.goals = std::move(goals);
  validate_goals(sc.goals, sc.grid, horizon);
  sc.task = std::move(task);
  sc.start_state = start;
  return sc;
}

/// The two-environment 1x7 corridor: a wall at x3 until t = 10.
inline Scenario two_period_corridor(int g2_deadline = 26) {
  return corridor_scenario(7, {{3}, {}}, {0, 10}, 40,
                           {{"G1", 2, Deterministic{10}}, {"G2", 6, Deterministic{g2_deadline}}}, "G1 > G2");
}

inline std::shared_ptr<const PlanContext> context_for(const Scenario& sc, PlannerOptions planner = {},
                                                      Execution exec = Execution::Serial, LmdpOptions lmdp = {}) {
  PipelineOptions po;
  po.planner = planner;
  po.execution = exec;
  po.lmdp = lmdp;
  Pipeline pipeline(sc, po);
  return pipeline.plan_context();
}

/// Dense row-major matrix.
struct Dense {
  std::size_t n = 0;
  std::vector<double> a;
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline Dense dense(const TransitionMatrix& m) {
  Dense d{m.size(), std::vector<double>(m.size() * m.size(), 0.0)};
  for (StateIndex i = 0; i < m.size(); ++i) {
    for (const auto& e : m.row(i)) d(i, e.to) += e.p;
  }
  return d;
}

/// F(i, t) = sum over paths: probability of having visited the target by t,
/// by propagating each start state's distribution with the target made a sink.
inline std::vector<std::vector<double>> dense_cdf(const TransitionMatrix& u, StateIndex target, int horizon) {
  const Dense d = dense(u);
  const std::size_t n = d.n;
  std::vector<std::vector<double>> F(n, std::vector<double>(static_cast<std::size_t>(horizon) + 1, 0.0));
  for (StateIndex i = 0; i < n; ++i) {
    std::vector<double> dist(n, 0.0);
    dist[i] = 1.0;
    for (int t = 0; t <= horizon; ++t) {
      F[i][static_cast<std::size_t>(t)] = dist[target];
      std::vector<double> next(n, 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        if (dist[x] == 0.0) continue;
        if (x == target) {
          next[x] += dist[x];
          continue;
        }
        for (std::size_t y = 0; y < n; ++y) next[y] += dist[x] * d(x, y);
      }
      dist.swap(next);
    }
  }
  return F;
}

/// Exhaustive search over per-period target sequences: from environment k,
/// follow target j_k for the whole period (or reach the goal under its
/// deadline), then continue from j_k at the next period start.
inline double brute_force_kappa(const Scenario& sc, const std::vector<std::vector<std::vector<std::vector<double>>>>& cdf,
                                std::size_t c, std::size_t k, StateIndex i, bool inclusive = false) {
  const auto& schedule = sc.schedule;
  const auto& goal = sc.goals[c];
  const std::size_t n = sc.grid.state_count();
  const std::size_t envs = schedule.count();

  auto F = [&](std::size_t kk, StateIndex j, StateIndex from, int t) {
    if (t < 0 || cdf[kk][j].empty()) return 0.0;
    return cdf[kk][j][from][static_cast<std::size_t>(std::min(t, schedule.horizon))];
  };
  auto goal_term = [&](std::size_t kk, StateIndex from) {
    double total = 0.0;
    for (const auto& [d, p] : deadline_support(goal.deadline)) {
      const int last = inclusive ? d - schedule.start(kk) : d - schedule.start(kk) - 1;
      total += p * F(kk, goal.state, from, last);
    }
    return total;
  };

  std::function<double(std::size_t, StateIndex)> best = [&](std::size_t kk, StateIndex from) {
    double value = 0.0;
    for (StateIndex j = 0; j < n; ++j) {
      if (cdf[kk][j].empty()) continue;
      double v;
      if (j == goal.state) {
        v = goal_term(kk, from);
      } else {
        if (kk + 1 >= envs) continue;
        v = F(kk, j, from, schedule.duration(kk)) * best(kk + 1, j);
      }
      value = std::max(value, v);
    }
    return value;
  };
  return best(k, i);
}

}  // namespace csp::testing
