#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "csp/pipeline.hpp"
#include "csp/reach.hpp"
#include "csp/scenario.hpp"
#include "csp/sim.hpp"
#include "csp/tasklogic.hpp"
#include "support.hpp"

using namespace csp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<fs::path> scenario_files() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(CSP_SCENARIO_DIR)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Scenario scenario(const std::string& name) { return load_scenario(fs::path(CSP_SCENARIO_DIR) / name); }

LmdpSolution corridor_policy() {
  const Grid grid{5, 1};
  return solve(build_cost_matrix(4, {}, 5, 0.9), passive_dynamics(grid, {}), 4);
}

void lmdp_correctness(Outcome& out) {
  const auto start = Clock::now();
  double worst_residual = 0.0;
  double worst_row = 0.0;
  std::size_t slices = 0;
  for (const auto& file : scenario_files()) {
    const Scenario sc = load_scenario(file);
    const std::size_t n = sc.grid.state_count();
    for (const auto& obstacles : sc.schedule.obstacles) {
      const auto passive = passive_dynamics(sc.grid, obstacles);
      for (StateIndex j = 0; j < n; ++j) {
        if (std::binary_search(obstacles.begin(), obstacles.end(), j)) continue;
        const auto q = build_cost_matrix(j, obstacles, n, 0.9);
        const auto sol = solve(q, passive, j);
        for (StateIndex i = 0; i < n; ++i) {
          if (i != j) {
            double g = 0.0;
            for (const auto& e : passive.row(i)) g += e.p * sol.z[e.to];
            worst_residual = std::max(worst_residual, std::abs(q[i] * g - sol.z[i]));
          }
          worst_row = std::max(worst_row, std::abs(sol.u.row_sum(i) - 1.0));
        }
        ++slices;
      }
    }
  }
  const auto corridor = corridor_policy();
  bool monotone = true;
  for (StateIndex i = 0; i + 1 < 5; ++i) monotone = monotone && corridor.z[i] < corridor.z[i + 1];
  const double elapsed = seconds_since(start);
  out.detail << slices << " slices, max residual " << worst_residual << ", max row-sum error " << worst_row
             << ", corridor z monotone " << (monotone ? "yes" : "no") << ", " << elapsed << "s";
  out.require(worst_residual < 1e-12, "residual < 1e-12");
  out.require(worst_row <= 1e-9, "rows stochastic within 1e-9");
  out.require(monotone, "corridor z strictly increasing");
  out.require(elapsed < 1.0, "runtime < 1s");
}

void hitting_time_oracle(Outcome& out) {
  const auto start = Clock::now();
  const auto sol = corridor_policy();
  const int horizon = 200;
  const auto model = build_arrival_model(sol.u, 4, horizon, CdfMode::Exact);
  const std::size_t rollouts = 100000;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(horizon) + 2, 0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 0; r < rollouts; ++r) {
    StateIndex x = 0;
    int t = 0;
    while (x != 4) {
      double u = unit(rng);
      StateIndex next = x;
      for (const auto& e : sol.u.row(x)) {
        next = e.to;
        if (u < e.p) break;
        u -= e.p;
      }
      x = next;
      ++t;
    }
    ++counts[static_cast<std::size_t>(std::min(t, horizon + 1))];
    sum += t;
    sum_sq += static_cast<double>(t) * t;
  }
  double sup = 0.0;
  std::size_t cumulative = 0;
  for (int t = 0; t <= horizon; ++t) {
    cumulative += counts[static_cast<std::size_t>(t)];
    const double empirical = static_cast<double>(cumulative) / static_cast<double>(rollouts);
    sup = std::max(sup, std::abs(empirical - cdf_eval(model, 0, t, CdfMode::Exact)));
  }
  const double n = static_cast<double>(rollouts);
  const double mc_mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mc_mean * mc_mean) / n);
  const double gap = std::abs(model.mean[0] - mc_mean);
  const double elapsed = seconds_since(start);
  out.detail << "sup-distance " << sup << ", t_mu " << model.mean[0] << " vs MC " << mc_mean << " (" << gap / se
             << " SE), " << elapsed << "s";
  out.require(sup < 0.01, "sup-distance < 0.01");
  out.require(gap <= 3.0 * se, "mean within 3 SE");
  out.require(elapsed < 30.0, "runtime < 30s");
}

void gamma_fidelity(Outcome& out) {
  double worst = 0.0;
  const auto sol = corridor_policy();
  const auto m = hitting_moments(sol.u, 4);
  const auto g = gamma_fit(m.mean, m.variance, m.unreachable);
  for (StateIndex i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(g.alpha[i] / g.beta[i] - m.mean[i]) / m.mean[i]);
    worst = std::max(worst, std::abs(g.alpha[i] / (g.beta[i] * g.beta[i]) - m.variance[i]) / m.variance[i]);
  }

  std::vector<std::vector<TransitionMatrix::Entry>> rows(6);
  for (StateIndex i = 0; i < 5; ++i) rows[i].push_back({i + 1, 1.0});
  rows[5].push_back({5, 1.0});
  const TransitionMatrix chain(std::move(rows));
  const int horizon = 12;
  const auto model = build_arrival_model(chain, 5, horizon, CdfMode::Exact);
  std::size_t mismatches = 0;
  for (StateIndex i = 0; i < 6; ++i) {
    for (int t = 0; t <= horizon; ++t) {
      if (cdf_eval(model, i, t, CdfMode::Gamma) != cdf_eval(model, i, t, CdfMode::Exact)) ++mismatches;
    }
  }
  out.detail << "max relative moment error " << worst << ", deterministic-chain mismatches " << mismatches;
  out.require(worst <= 1e-12, "moments within 1e-12");
  out.require(mismatches == 0, "degenerate CDF exact");
}

void reachability_identities(Outcome& out) {
  double pmf_error = 0.0;
  std::size_t identity_failures = 0;
  std::size_t checked = 0;
  for (const auto& file : scenario_files()) {
    const Scenario sc = load_scenario(file);
    const auto ctx = testing::context_for(sc);
    const std::size_t n = sc.grid.state_count();
    const int horizon = sc.schedule.horizon;
    const std::vector<int> times{horizon / 3, horizon / 2, horizon};
    GoalSet probe;
    for (int d : times) probe.goals.push_back({"D" + std::to_string(d), 0, Deterministic{d}});
    probe.goals.push_back({"P", 0, DiscretePmf{{{times[0], 0.2}, {times[1], 0.3}, {times[2], 0.5}}}});
    const std::vector<double> weights{0.2, 0.3, 0.5};
    for (bool inclusive : {false, true}) {
      const auto tensor = build_tensor(ctx->arrivals, sc.schedule, probe, CdfMode::Exact, inclusive);
      for (std::size_t k = 0; k < sc.schedule.count(); ++k) {
        const int dk = sc.schedule.start(k);
        for (StateIndex j = 0; j < n; ++j) {
          if (!tensor.has_target(k, j)) continue;
          for (std::size_t c = 0; c < times.size(); ++c) {
            const int offset = last_admissible_offset(times[c], dk, inclusive);
            for (StateIndex i = 0; i < n; ++i) {
              ++checked;
              if (tensor.goal(k, c, j, i) != tensor.deterministic(k, j, offset, i)) ++identity_failures;
            }
          }
          for (StateIndex i = 0; i < n; ++i) {
            double mix = 0.0;
            for (std::size_t c = 0; c < times.size(); ++c) mix += weights[c] * tensor.goal(k, c, j, i);
            pmf_error = std::max(pmf_error, std::abs(mix - tensor.goal(k, 3, j, i)));
          }
        }
      }
    }
  }
  out.detail << checked << " det-slice identities (strict offset D-d_k-1, inclusive offset D-d_k), " << identity_failures
             << " mismatches, PMF linearity error " << pmf_error;
  out.require(identity_failures == 0, "goal slice equals det slice exactly");
  out.require(pmf_error <= 1e-12, "PMF linearity within 1e-12");
}

void feasibility_brute_force(Outcome& out) {
  std::mt19937 rng(7);
  const Grid shapes[] = {{12, 1}, {6, 2}, {4, 3}, {3, 4}, {2, 6}, {3, 3}, {5, 2}, {1, 12}};
  double worst = 0.0;
  double slowest = 0.0;
  std::size_t instances = 0;
  for (int trial = 0; trial < 48; ++trial) {
    const Grid grid = shapes[trial % 8];
    const std::size_t n = grid.state_count();
    const std::size_t envs = 1 + static_cast<std::size_t>(trial % 3);
    const int horizon = 30;
    Scenario sc;
    sc.grid = grid;
    sc.schedule.horizon = horizon;
    std::uniform_int_distribution<StateIndex> state(0, n - 1);
    for (std::size_t k = 0; k < envs; ++k) {
      sc.schedule.starts.push_back(static_cast<int>(k) * 9 + (k ? trial % 4 : 0));
      ObstacleSet b;
      for (std::size_t o = 0; o < n / 4; ++o) b.push_back(state(rng));
      sc.schedule.obstacles.push_back(b);
    }
    sc.schedule = validate_schedule(sc.schedule, grid);
    const std::size_t goal_count = 1 + static_cast<std::size_t>(trial % 2);
    for (std::size_t c = 0; c < goal_count; ++c) {
      Goal g;
      g.label = "G" + std::to_string(c + 1);
      g.state = state(rng);
      if ((trial + c) % 2 == 0) {
        g.deadline = Deterministic{std::uniform_int_distribution<int>(4, horizon)(rng)};
      } else {
        g.deadline = DiscretePmf{{{std::uniform_int_distribution<int>(3, 14)(rng), 0.35},
                                  {std::uniform_int_distribution<int>(15, horizon)(rng), 0.65}}};
      }
      sc.goals.goals.push_back(g);
    }
    for (bool inclusive : {false, true}) {
      const auto start = Clock::now();
      PlannerOptions po;
      po.deadline_inclusive = inclusive;
      const auto ctx = testing::context_for(sc, po);
      std::vector<std::vector<std::vector<std::vector<double>>>> cdf(envs);
      for (std::size_t k = 0; k < envs; ++k) {
        cdf[k].resize(n);
        for (StateIndex j = 0; j < n; ++j) {
          if (const auto* slice = ctx->ensemble.slice(k, j)) cdf[k][j] = testing::dense_cdf(slice->u, j, horizon);
        }
      }
      for (std::size_t c = 0; c < goal_count; ++c) {
        for (std::size_t k = 0; k < envs; ++k) {
          for (StateIndex i = 0; i < n; ++i) {
            const double expected = testing::brute_force_kappa(sc, cdf, c, k, i, inclusive);
            worst = std::max(worst, std::abs(ctx->feasibility.kappa(c, k, i) - expected));
          }
        }
      }
      slowest = std::max(slowest, seconds_since(start));
      ++instances;
    }
  }
  out.detail << instances << " instances, max |kappa - brute force| " << worst << ", slowest " << slowest << "s";
  out.require(worst <= 1e-12, "kappa within 1e-12");
  out.require(slowest < 10.0, "runtime < 10s per instance");
}

void dnf_counts(Outcome& out) {
  auto count = [](const std::string& formula) {
    const auto ast = parse(formula);
    return to_dnf(ast, collect_labels(ast)).size();
  };
  const std::size_t fig = count("(G1&G2)>(G3&G4)");
  out.detail << "(G1&G2)>(G3&G4) -> " << fig << " words";
  out.require(fig == 4, "4 words");

  std::size_t block_cases = 0;
  auto factorial = [](std::size_t v) {
    std::size_t f = 1;
    for (std::size_t i = 2; i <= v; ++i) f *= i;
    return f;
  };
  std::function<void(std::vector<std::size_t>&)> sweep = [&](std::vector<std::size_t>& sizes) {
    if (!sizes.empty()) {
      std::string formula;
      std::size_t expected = 1;
      int label = 0;
      for (std::size_t b = 0; b < sizes.size(); ++b) {
        if (b) formula += " > ";
        formula += "(";
        for (std::size_t i = 0; i < sizes[b]; ++i) formula += (i ? " & A" : "A") + std::to_string(label++);
        formula += ")";
        expected *= factorial(sizes[b]);
      }
      const std::size_t got = count(formula);
      ++block_cases;
      out.require(got == expected, formula + " gave " + std::to_string(got));
    }
    if (sizes.size() == 3) return;
    for (std::size_t s = 1; s <= 4; ++s) {
      sizes.push_back(s);
      sweep(sizes);
      sizes.pop_back();
    }
  };
  std::vector<std::size_t> sizes;
  sweep(sizes);
  out.detail << ", " << block_cases << " block layouts match the product of factorials";
}

void calibrate(Outcome& out, const Scenario& sc, const std::string& name) {
  const auto ctx = testing::context_for(sc, {}, Execution::Parallel);
  const auto plan = plan_task(ctx, sc.task, sc.start_state);
  MonteCarloOptions mc;
  mc.episodes = 100000;
  mc.base_seed = 1;
  mc.z = 3.0;
  const auto result = monte_carlo(*plan.policy, sc.start_state, mc);
  const double predicted = plan.probability();
  out.detail << name << ": predicted " << predicted << ", simulated " << result.rate << " in [" << result.lower
             << ", " << result.upper << "], arrival bounds";
  for (const auto& leg : plan.scores[plan.best].legs) {
    out.detail << ' ' << (leg.arrival_bound ? std::to_string(*leg.arrival_bound) : std::string("none"));
  }
  out.detail << "; ";
  out.require(predicted >= result.lower && predicted <= result.upper, name + " inside 3-sigma Wilson interval");
}

void end_to_end_calibration(Outcome& out) {
  const auto start = Clock::now();
  const Scenario corridor = scenario("corridor.json");
  calibrate(out, corridor, "corridor.json");
  Scenario pmf = corridor;
  pmf.goals.goals[1].deadline = DiscretePmf{{{22, 0.5}, {30, 0.5}}};
  calibrate(out, pmf, "corridor with PMF deadline");
  const double elapsed = seconds_since(start);
  out.detail << elapsed << "s";
  out.require(elapsed < 60.0, "runtime < 60s");
}

std::multiset<std::string> digests(const Pipeline& p, const char* stage) {
  const auto& d = p.report(stage)->digests;
  return {d.begin(), d.end()};
}

void compositional_reuse(Outcome& out) {
  const fs::path dir = fs::temp_directory_path() / ("csp-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const Scenario forward = scenario("fig4_forward.json");
  const Scenario reverse = scenario("fig4_reverse.json");
  PipelineOptions po;

  Pipeline a(forward, po, ArtifactCache(dir));
  const auto actx = a.plan_context();
  Pipeline b(reverse, po, ArtifactCache(dir));
  b.plan_context();

  for (const char* stage : {"ensemble", "arrival", "reach"}) {
    out.require(digests(a, stage) == digests(b, stage), std::string(stage) + " digests equal");
    out.require(b.report(stage)->misses == 0, std::string(stage) + " fully cached");
  }
  for (const char* stage : {"goal_slices", "feasibility"}) {
    out.require(b.report(stage)->misses > 0, std::string(stage) + " recomputed");
  }
  out.detail << "reverse run hits ensemble/arrival/reach " << b.report("ensemble")->hits << "/"
             << b.report("arrival")->hits << "/" << b.report("reach")->hits << ", recomputes goal_slices/feasibility "
             << b.report("goal_slices")->misses << "/" << b.report("feasibility")->misses;

  const std::vector<std::string> tasks{forward.task, "(L1 | L2) > R1", "R2 & L1"};
  std::set<std::string> feasibility_digests;
  std::size_t feasibility_hits = 0;
  for (const auto& task : tasks) {
    Pipeline p(forward, po, ArtifactCache(dir));
    const auto ctx = p.plan_context();
    const auto plan = plan_task(ctx, task, forward.start_state);
    feasibility_digests.insert(p.report("feasibility")->digests.front());
    feasibility_hits += p.report("feasibility")->hits;
    out.detail << "; " << task << " -> " << plan.probability();
  }
  out.detail << "; " << tasks.size() << " tasks share " << feasibility_digests.size() << " feasibility digest";
  out.require(feasibility_digests.size() == 1, "tasks share the feasibility tensor");
  out.require(feasibility_hits == tasks.size(), "feasibility loaded from cache for every task");
  fs::remove_all(dir);
}

std::pair<std::string, std::string> artifacts(const Scenario& sc) {
  PipelineOptions po;
  Pipeline p(sc, po);
  const auto ctx = p.plan_context();
  const auto plan = plan_task(ctx, sc.task, sc.start_state);
  MonteCarloOptions mc;
  mc.episodes = 2000;
  mc.base_seed = 42;
  auto summary = to_json(monte_carlo(*plan.policy, sc.start_state, mc));
  return {plan_to_json(*ctx, plan).dump(2), summary.dump(2)};
}

void determinism(Outcome& out) {
  std::size_t compared = 0;
  for (const auto& file : scenario_files()) {
    const Scenario sc = load_scenario(file);
    const auto first = artifacts(sc);
    const auto second = artifacts(sc);
    out.require(first.first == second.first, file.filename().string() + " plan.json identical");
    out.require(first.second == second.second, file.filename().string() + " summary.json identical");
    ++compared;
  }
  out.detail << compared << " scenarios, plan and summary byte-identical across runs";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
      {"LMDP correctness", lmdp_correctness},
      {"hitting-time oracle equivalence", hitting_time_oracle},
      {"gamma fidelity", gamma_fidelity},
      {"reachability identities", reachability_identities},
      {"feasibility brute-force equivalence", feasibility_brute_force},
      {"DNF counts", dnf_counts},
      {"end-to-end calibration", end_to_end_calibration},
      {"compositional reuse", compositional_reuse},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    Outcome out;
    try {
      criteria[c].second(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %zu %s: %s  %s\n", c + 1, criteria[c].first, out.pass ? "PASS" : "FAIL",
                out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
