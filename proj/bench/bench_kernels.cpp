#include <benchmark/benchmark.h>

#include <memory>

#include "csp/feasibility.hpp"
#include "csp/pipeline.hpp"
#include "csp/sim.hpp"

using namespace csp;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

Scenario bench_scenario() {
  Scenario sc;
  sc.grid = {12, 12};
  ObstacleSet wall, gap_top, gap_bottom;
  for (int r = 0; r < 12; ++r) {
    const StateIndex s = sc.grid.index(r, 6);
    wall.push_back(s);
    if (r != 1) gap_top.push_back(s);
    if (r != 10) gap_bottom.push_back(s);
  }
  sc.schedule.obstacles = {gap_top, wall, gap_bottom};
  sc.schedule.starts = {0, 50, 100};
  sc.schedule.horizon = 150;
  sc.schedule = validate_schedule(sc.schedule, sc.grid);
  sc.goals.goals = {{"A", sc.grid.index(0, 0), Deterministic{60}},
                    {"B", sc.grid.index(11, 11), DiscretePmf{{{120, 0.5}, {150, 0.5}}}}};
  sc.task = "A > B";
  sc.start_state = sc.grid.index(6, 2);
  return sc;
}

const Scenario& scenario() {
  static const Scenario sc = bench_scenario();
  return sc;
}

const std::shared_ptr<const PlanContext>& context() {
  static const auto ctx = [] {
    PipelineOptions po;
    Pipeline p(scenario(), po);
    return p.plan_context();
  }();
  return ctx;
}

void BM_Ensemble(benchmark::State& state) {
  const auto& sc = scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_environment(sc.grid, sc.schedule.obstacles[0], {}, mode(state)));
  }
}

void BM_Arrivals(benchmark::State& state) {
  const auto& sc = scenario();
  const auto policies = solve_environment(sc.grid, sc.schedule.obstacles[0], {}, Execution::Parallel);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_environment_arrivals(policies, sc.schedule.horizon, CdfMode::Exact, mode(state)));
  }
}

void BM_Feasibility(benchmark::State& state) {
  const auto& ctx = context();
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_recursion(ctx->reach, ctx->schedule, ctx->goals, mode(state)));
  }
}

void BM_MonteCarlo(benchmark::State& state) {
  const auto& ctx = context();
  const auto plan = plan_task(ctx, scenario().task, scenario().start_state, Execution::Serial);
  MonteCarloOptions mc;
  mc.episodes = 2000;
  mc.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(*plan.policy, scenario().start_state, mc));
}

}  // namespace

BENCHMARK(BM_Ensemble)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Arrivals)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feasibility)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
