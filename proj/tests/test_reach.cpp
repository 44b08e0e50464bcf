#include <doctest.h>

#include <cmath>

#include "csp/reach.hpp"
#include "support.hpp"

using namespace csp;

namespace {

ArrivalModel chain_model(std::size_t n, int horizon) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) d[i][i + 1] = 1.0;
  d[n - 1][n - 1] = 1.0;
  return build_arrival_model(TransitionMatrix::from_dense(d), n - 1, horizon, CdfMode::Exact);
}

}  // namespace

TEST_CASE("reach with deterministic deadlines") {
  const auto m = chain_model(8, 20);
  CHECK(reach(m, 0, 5, Deterministic{5}, CdfMode::Exact) == 0.0);
  CHECK(reach(m, 0, 6, Deterministic{5}, CdfMode::Exact) == 0.0);
  CHECK(reach(m, 7, 3, Deterministic{4}, CdfMode::Exact) == 1.0);
  CHECK(reach(m, 7, 4, Deterministic{4}, CdfMode::Exact) == 0.0);
  CHECK(reach(m, 7, 4, Deterministic{4}, CdfMode::Exact, true) == 1.0);
  // 4 steps from x3: arrival at t = 4 is strictly before 5 but not before 4.
  CHECK(reach(m, 3, 0, Deterministic{5}, CdfMode::Exact) == 1.0);
  CHECK(reach(m, 3, 0, Deterministic{4}, CdfMode::Exact) == 0.0);
  CHECK(reach(m, 3, 0, Deterministic{4}, CdfMode::Exact, true) == 1.0);
}

TEST_CASE("reach with a PMF deadline") {
  const auto m = chain_model(12, 20);
  const DiscretePmf pmf{{{5, 0.5}, {10, 0.5}}};
  CHECK(reach(m, 8, 0, pmf, CdfMode::Exact) == 1.0);   // 3 steps away
  CHECK(reach(m, 4, 0, pmf, CdfMode::Exact) == 0.5);   // 7 steps away
  CHECK(reach(m, 11, 0, pmf, CdfMode::Exact) == 1.0);
  CHECK(reach(m, 11, 7, pmf, CdfMode::Exact) == 0.5);  // only the later deadline is still open
}

TEST_CASE("reach linearity and monotonicity on the corridor") {
  const Grid grid{5, 1};
  const auto sol = solve(build_cost_matrix(4, {}, 5, 0.9), passive_dynamics(grid, {}), 4);
  const auto m = build_arrival_model(sol.u, 4, 60, CdfMode::Exact);
  const DiscretePmf pmf{{{7, 0.2}, {15, 0.3}, {31, 0.5}}};
  for (StateIndex i = 0; i < 5; ++i) {
    for (int s : {0, 3, 9}) {
      const double mixed = reach(m, i, s, pmf, CdfMode::Exact);
      const double sum = 0.2 * reach(m, i, s, Deterministic{7}, CdfMode::Exact) +
                         0.3 * reach(m, i, s, Deterministic{15}, CdfMode::Exact) +
                         0.5 * reach(m, i, s, Deterministic{31}, CdfMode::Exact);
      CHECK(std::abs(mixed - sum) < 1e-12);
    }
    double prev = 0.0;
    for (int d = 0; d <= 50; ++d) {
      const double r = reach(m, i, 0, Deterministic{d}, CdfMode::Exact);
      CHECK(r >= prev);
      prev = r;
    }
    prev = 1.0;
    for (int s = 0; s <= 40; ++s) {
      const double r = reach(m, i, s, Deterministic{40}, CdfMode::Exact);
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("tensor slices") {
  const Scenario sc = testing::two_period_corridor();
  for (bool inclusive : {false, true}) {
    PlannerOptions po;
    po.deadline_inclusive = inclusive;
    const auto ctx = testing::context_for(sc, po);
    const auto& R = ctx->reach;
    const std::size_t n = 7;
    for (std::size_t k = 0; k < 2; ++k) {
      for (StateIndex j = 0; j < n; ++j) {
        if (!R.has_target(k, j)) {
          CHECK((k == 0 && j == 3));
          continue;
        }
        for (StateIndex i = 0; i < n; ++i) {
          CHECK(R.deterministic(k, j, 0, i) == (i == j ? 1.0 : 0.0));
          for (int t = 0; t < sc.schedule.horizon; ++t) {
            CHECK(R.deterministic(k, j, t, i) <= R.deterministic(k, j, sc.schedule.horizon, i));
          }
        }
        // Goal slice of a deterministic deadline D is the det slice at the
        // last admissible relative offset.
        for (std::size_t c = 0; c < 2; ++c) {
          const int D = std::get<Deterministic>(sc.goals[c].deadline).time;
          const int offset = last_admissible_offset(D, sc.schedule.start(k), inclusive);
          for (StateIndex i = 0; i < n; ++i) CHECK(R.goal(k, c, j, i) == R.deterministic(k, j, offset, i));
          const double expected = meets_deadline(sc.schedule.start(k), D, inclusive) ? 1.0 : 0.0;
          CHECK(R.goal(k, c, j, j) == expected);
        }
      }
    }
  }
}

TEST_CASE("tensor slices for a blocked target are zero") {
  const Scenario sc = testing::two_period_corridor();
  const auto ctx = testing::context_for(sc);
  CHECK_FALSE(ctx->reach.has_target(0, 3));
  CHECK(ctx->reach.deterministic_slice(0, 3, 5).empty());
  for (std::size_t c = 0; c < 2; ++c) {
    for (double v : ctx->reach.goal_slice(0, c, 3)) CHECK(v == 0.0);
  }
}

TEST_CASE("period end deadline admits arrival at the next start") {
  const EnvironmentSchedule s{{{}, {}}, {0, 10}, 30};
  CHECK(period_end_deadline(s, 0, false) == 11);
  CHECK(period_end_deadline(s, 0, true) == 10);
  CHECK(last_admissible_offset(period_end_deadline(s, 0, false), 0, false) == period_horizon(s, 0));
  CHECK(last_admissible_offset(period_end_deadline(s, 0, true), 0, true) == period_horizon(s, 0));
  CHECK(period_horizon(s, 1) == 21);
}
