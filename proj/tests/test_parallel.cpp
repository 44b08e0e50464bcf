#include <doctest.h>

#include "csp/sim.hpp"
#include "support.hpp"

using namespace csp;

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const Scenario sc = load_scenario(std::string(CSP_SCENARIO_DIR) + "/fig4_forward.json");
  for (CdfMode mode : {CdfMode::Exact, CdfMode::Gamma}) {
    PlannerOptions po;
    po.mode = mode;
    const auto serial = testing::context_for(sc, po, Execution::Serial);
    const auto parallel = testing::context_for(sc, po, Execution::Parallel);
    for (std::size_t k = 0; k < sc.schedule.count(); ++k) {
      CHECK(serial->ensemble.environment(k) == parallel->ensemble.environment(k));
      CHECK(*serial->arrivals[k] == *parallel->arrivals[k]);
      CHECK(serial->reach.environment(k) == parallel->reach.environment(k));
    }
    CHECK(serial->reach.goal_values() == parallel->reach.goal_values());
    CHECK(serial->feasibility == parallel->feasibility);

    const auto ps = plan_task(serial, sc.task, sc.start_state, Execution::Serial);
    const auto pp = plan_task(parallel, sc.task, sc.start_state, Execution::Parallel);
    CHECK(plan_to_json(*serial, ps).dump() == plan_to_json(*parallel, pp).dump());

    MonteCarloOptions mc;
    mc.episodes = 500;
    mc.base_seed = 3;
    mc.keep_episodes = true;
    mc.execution = Execution::Serial;
    const auto a = monte_carlo(*ps.policy, sc.start_state, mc);
    mc.execution = Execution::Parallel;
    const auto b = monte_carlo(*pp.policy, sc.start_state, mc);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(a.kept == b.kept);
  }
}
