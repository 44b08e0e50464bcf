#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csp/error.hpp"
#include "csp/export.hpp"
#include "csp/pipeline.hpp"
#include "csp/scenario.hpp"
#include "csp/sim.hpp"
#include "csp/tasklogic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string scenario;
  std::string mode = "exact";
  double epsilon = 0.9;
  double tolerance = 1e-12;
  std::size_t max_iterations = 0;
  std::string cache_dir;
  bool inclusive = false;
  double confidence = 0.99;
  bool serial = false;
  std::string task;
  std::string out = ".";
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--mode", o.mode, "Arrival CDF mode")->check(CLI::IsMember({"exact", "gamma"}));
  cmd.add_option("--epsilon", o.epsilon, "Interior desirability exp(-q), in (0, 1)");
  cmd.add_option("--tolerance", o.tolerance, "Fixed-point residual tolerance");
  cmd.add_option("--max-iterations", o.max_iterations, "Iteration cap (0 = 100 * N)");
  cmd.add_option("--cache-dir", o.cache_dir, "Artifact cache directory")->envname("CSP_CACHE_DIR");
  cmd.add_flag("--deadline-inclusive", o.inclusive, "Admit arrival exactly at the deadline");
  cmd.add_option("--arrival-confidence", o.confidence, "Arrival quantile anchoring the next leg")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_flag("--serial", o.serial, "Use the serial kernels");
  cmd.add_option("--out", o.out, "Output directory");
}

csp::Pipeline make_pipeline(const CommonOptions& o, csp::Scenario scenario) {
  csp::PipelineOptions po;
  po.lmdp.epsilon = o.epsilon;
  po.lmdp.tolerance = o.tolerance;
  po.lmdp.max_iterations = o.max_iterations;
  po.planner.mode = o.mode == "gamma" ? csp::CdfMode::Gamma : csp::CdfMode::Exact;
  po.planner.deadline_inclusive = o.inclusive;
  po.planner.arrival_confidence = o.confidence;
  po.execution = o.serial ? csp::Execution::Serial : csp::Execution::Parallel;
  csp::ArtifactCache cache = o.cache_dir.empty() ? csp::ArtifactCache() : csp::ArtifactCache(o.cache_dir);
  return csp::Pipeline(std::move(scenario), po, std::move(cache));
}

csp::Execution execution(const CommonOptions& o) {
  return o.serial ? csp::Execution::Serial : csp::Execution::Parallel;
}

void print_reports(const csp::Pipeline& pipeline) {
  for (const auto& w : pipeline.cache().warnings()) std::cerr << "warning: " << w << '\n';
  std::printf("%-12s %6s %6s %10s %12s\n", "stage", "hits", "misses", "seconds", "bytes");
  for (const auto& r : pipeline.reports()) {
    std::printf("%-12s %6zu %6zu %10.4f %12zu\n", r.stage.c_str(), r.hits, r.misses, r.seconds, r.bytes);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string words_csv(const csp::PlanContext& ctx, const csp::PlanResult& plan) {
  std::string out = "word,probability,leg_probabilities,infeasible_leg\n";
  for (const auto& s : plan.scores) {
    out += csp::word_to_string(s.word, ctx.goals) + ',' + fmt(s.probability) + ',';
    for (std::size_t m = 0; m < s.legs.size(); ++m) {
      if (m) out += ';';
      out += fmt(s.legs[m].probability);
    }
    out += ',';
    if (s.infeasible_leg) out += std::to_string(*s.infeasible_leg + 1);
    out += '\n';
  }
  return out;
}

void write_kappa(const csp::PlanContext& ctx, std::size_t c, std::size_t k, const fs::path& dir) {
  const auto map = csp::feasibility_map(ctx.feasibility, c, k);
  const std::string stem = "kappa_" + ctx.goals[c].label + "_" + std::to_string(k + 1);
  csp::write_file_atomic(dir / (stem + ".pgm"), csp::encode_pgm16(ctx.grid, map));
  csp::write_file_atomic(dir / (stem + ".csv"), csp::encode_grid_csv(ctx.grid, map));
}

void print_plan(const csp::PlanContext& ctx, const csp::PlanResult& plan) {
  std::printf("%-4s %-32s %-22s %s\n", "", "word", "probability", "legs");
  for (std::size_t w = 0; w < plan.scores.size(); ++w) {
    const auto& s = plan.scores[w];
    std::string legs;
    for (const auto& leg : s.legs) {
      if (!legs.empty()) legs += ' ';
      legs += fmt(leg.probability);
    }
    std::printf("%-4s %-32s %-22s %s\n", w == plan.best ? "*" : "", csp::word_to_string(s.word, ctx.goals).c_str(),
                fmt(s.probability).c_str(), legs.c_str());
  }
  const auto& best = plan.scores[plan.best];
  if (best.probability == 0.0 && best.infeasible_leg) {
    const std::size_t m = *best.infeasible_leg;
    std::printf("task probability is 0: leg %zu", m + 1);
    if (m < best.word.size()) std::printf(" (goal %s)", ctx.goals[best.word[m]].label.c_str());
    std::printf(" has zero feasibility\n");
  }
}

struct Planned {
  std::shared_ptr<const csp::PlanContext> context;
  csp::PlanResult plan;
};

Planned run_plan(csp::Pipeline& pipeline, const CommonOptions& o) {
  Planned p;
  p.context = pipeline.plan_context();
  const std::string task = o.task.empty() ? pipeline.scenario().task : o.task;
  p.plan = csp::plan_task(p.context, task, pipeline.scenario().start_state, execution(o));
  return p;
}

int cmd_solve(const CommonOptions& o) {
  auto pipeline = make_pipeline(o, csp::load_scenario(o.scenario));
  pipeline.solve();
  print_reports(pipeline);
  return 0;
}

int cmd_plan(const CommonOptions& o) {
  auto pipeline = make_pipeline(o, csp::load_scenario(o.scenario));
  const Planned p = run_plan(pipeline, o);
  print_reports(pipeline);
  print_plan(*p.context, p.plan);

  const fs::path dir(o.out);
  csp::write_file_atomic(dir / "plan.json", csp::plan_to_json(*p.context, p.plan).dump(2) + "\n");
  csp::write_file_atomic(dir / "words.csv", words_csv(*p.context, p.plan));
  for (std::size_t c = 0; c < p.context->goals.size(); ++c) {
    for (std::size_t k = 0; k < p.context->schedule.count(); ++k) write_kappa(*p.context, c, k, dir);
  }
  return 0;
}

int cmd_simulate(const CommonOptions& o, std::size_t episodes, std::uint64_t seed) {
  auto pipeline = make_pipeline(o, csp::load_scenario(o.scenario));
  const Planned p = run_plan(pipeline, o);

  csp::MonteCarloOptions mc;
  mc.episodes = episodes;
  mc.base_seed = seed;
  mc.keep_episodes = true;
  mc.execution = execution(o);
  const auto result = csp::monte_carlo(*p.plan.policy, pipeline.scenario().start_state, mc);

  std::string lines;
  for (const auto& ep : result.kept) lines += csp::to_json(ep).dump() + "\n";
  nlohmann::json summary = csp::to_json(result);
  summary["seed"] = seed;
  summary["word"] = csp::word_to_string(p.plan.policy->word(), p.context->goals);
  summary["predicted"] = p.plan.probability();
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& leg : p.plan.scores[p.plan.best].legs) {
    bounds.push_back(leg.arrival_bound ? nlohmann::json(*leg.arrival_bound) : nlohmann::json());
  }
  summary["arrival_bounds"] = bounds;

  const fs::path dir(o.out);
  csp::write_file_atomic(dir / "episodes.jsonl", lines);
  csp::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  std::printf("word %s  predicted %s  simulated %s  [%s, %s]  (%zu episodes)\n", summary["word"].get<std::string>().c_str(),
              fmt(p.plan.probability()).c_str(), fmt(result.rate).c_str(), fmt(result.lower).c_str(),
              fmt(result.upper).c_str(), result.episodes);
  return 0;
}

int cmd_logic(const std::string& formula, const std::string& scenario_path) {
  const csp::TaskAst ast = csp::parse(formula);
  std::vector<std::string> labels;
  if (!scenario_path.empty()) {
    labels = csp::load_scenario(scenario_path).goals.labels();
  } else {
    labels = csp::collect_labels(ast);
  }
  const auto words = csp::to_dnf(ast, labels);
  std::printf("%s\n", csp::to_string(ast).c_str());
  for (const auto& w : words) {
    std::string line;
    for (std::size_t m = 0; m < w.size(); ++m) {
      if (m) line += ' ';
      line += labels[w[m]];
    }
    std::printf("%s\n", line.c_str());
  }
  std::printf("%zu word%s\n", words.size(), words.size() == 1 ? "" : "s");
  return 0;
}

int cmd_viz(const CommonOptions& o, const std::vector<std::string>& goal_labels, const std::vector<int>& envs,
            const std::vector<std::uint64_t>& trajectory_seeds) {
  auto pipeline = make_pipeline(o, csp::load_scenario(o.scenario));
  const auto ctx = pipeline.plan_context();
  const fs::path dir(o.out);

  std::vector<std::size_t> goals;
  for (const auto& label : goal_labels) {
    const auto c = ctx->goals.find(label);
    if (!c) throw csp::SchemaError({"unknown goal " + label});
    goals.push_back(*c);
  }
  if (goal_labels.empty()) {
    for (std::size_t c = 0; c < ctx->goals.size(); ++c) goals.push_back(c);
  }
  std::vector<std::size_t> ks;
  for (int k : envs) {
    if (k < 1 || static_cast<std::size_t>(k) > ctx->schedule.count()) {
      throw csp::SchemaError({"environment " + std::to_string(k) + " out of range"});
    }
    ks.push_back(static_cast<std::size_t>(k - 1));
  }
  if (envs.empty()) {
    for (std::size_t k = 0; k < ctx->schedule.count(); ++k) ks.push_back(k);
  }
  for (std::size_t c : goals) {
    for (std::size_t k : ks) {
      write_kappa(*ctx, c, k, dir);
      std::printf("kappa_%s_%zu.pgm\n", ctx->goals[c].label.c_str(), k + 1);
    }
  }

  if (!trajectory_seeds.empty()) {
    const std::string task = o.task.empty() ? pipeline.scenario().task : o.task;
    const auto plan = csp::plan_task(ctx, task, pipeline.scenario().start_state, execution(o));
    for (std::uint64_t seed : trajectory_seeds) {
      const auto ep = csp::rollout(*plan.policy, pipeline.scenario().start_state, seed);
      const std::string name = "trajectory_" + std::to_string(seed) + ".svg";
      csp::write_file_atomic(dir / name, csp::trajectory_svg(ctx->grid, ctx->schedule, ctx->goals, ep));
      std::printf("%s\n", name.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadline-constrained task planning over time-varying gridworlds"};
  app.require_subcommand(1);

  CommonOptions solve_opts, plan_opts, sim_opts, viz_opts;

  auto* solve = app.add_subcommand("solve", "Build or reuse policy, arrival and reach artifacts");
  add_common(*solve, solve_opts);

  auto* plan = app.add_subcommand("plan", "Score task words and write plan.json, words.csv and kappa maps");
  add_common(*plan, plan_opts);
  plan->add_option("--task", plan_opts.task, "Override the scenario task formula");

  std::size_t episodes = 1000;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rollouts of the selected policy");
  add_common(*simulate, sim_opts);
  simulate->add_option("--task", sim_opts.task, "Override the scenario task formula");
  simulate->add_option("--episodes", episodes, "Number of episodes");
  simulate->add_option("--seed", seed, "Base seed; episode e uses seed + e");

  std::string formula, logic_scenario;
  auto* logic = app.add_subcommand("logic", "Print the DNF word list of a formula");
  logic->add_option("formula", formula, "Task formula")->required();
  logic->add_option("--scenario", logic_scenario, "Resolve labels against a scenario's goals")
      ->check(CLI::ExistingFile);

  std::vector<std::string> viz_goals;
  std::vector<int> viz_envs;
  std::vector<std::uint64_t> viz_seeds;
  auto* viz = app.add_subcommand("viz", "Render kappa slices and episode trajectories");
  add_common(*viz, viz_opts);
  viz->add_option("--goal", viz_goals, "Goal label (repeatable; default all)");
  viz->add_option("--env", viz_envs, "1-based environment index (repeatable; default all)");
  viz->add_option("--trajectory", viz_seeds, "Render one episode per seed as SVG");
  viz->add_option("--task", viz_opts.task, "Override the scenario task formula");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(solve_opts);
    if (*plan) return cmd_plan(plan_opts);
    if (*simulate) return cmd_simulate(sim_opts, episodes, seed);
    if (*logic) return cmd_logic(formula, logic_scenario);
    if (*viz) return cmd_viz(viz_opts, viz_goals, viz_envs, viz_seeds);
  } catch (const csp::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const csp::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitSchema;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const csp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
