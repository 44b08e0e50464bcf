#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "csp/cache.hpp"
#include "csp/lmdp.hpp"
#include "csp/scenario.hpp"
#include "csp/synthesis.hpp"

namespace csp {

struct PipelineOptions {
  LmdpOptions lmdp;
  PlannerOptions planner;
  Execution execution = Execution::Parallel;
};

struct StageReport {
  std::string stage;
  std::size_t hits = 0;
  std::size_t misses = 0;
  double seconds = 0.0;
  /// SHA-256 of each artifact payload produced by the stage, in environment
  /// order (a single entry for feasibility).
  std::vector<std::string> digests;
  std::size_t bytes = 0;
};

/// Orchestrates ensemble -> arrival -> reach per distinct obstacle set, then
/// goal slices and feasibility for the scenario. Task-independent artifacts
/// are keyed only by (grid, obstacle set, LMDP options, horizon, CDF mode),
/// so scenarios that reorder the same environments reuse them.
class Pipeline {
 public:
  Pipeline(Scenario scenario, PipelineOptions options, ArtifactCache cache = {});

  void solve();
  /// Runs solve() if needed, then goal slices and feasibility.
  std::shared_ptr<const PlanContext> plan_context();

  const Scenario& scenario() const noexcept { return scenario_; }
  const PipelineOptions& options() const noexcept { return options_; }
  const std::vector<StageReport>& reports() const noexcept { return reports_; }
  const StageReport* report(std::string_view stage) const;
  const ArtifactCache& cache() const noexcept { return cache_; }

 private:
  StageReport& stage(std::string_view name);

  Scenario scenario_;
  PipelineOptions options_;
  ArtifactCache cache_;
  std::vector<StageReport> reports_;

  bool solved_ = false;
  std::vector<std::shared_ptr<const EnvironmentPolicies>> policies_;
  ArrivalSet arrivals_;
  std::vector<std::shared_ptr<const EnvironmentReach>> reach_;
  std::vector<Digest> reach_keys_;
  std::shared_ptr<const PlanContext> context_;
};

struct PlanResult {
  std::vector<Word> words;
  std::vector<WordScore> scores;
  std::size_t best = 0;
  std::shared_ptr<const CompositePolicy> policy;

  double probability() const { return scores.at(best).probability; }
};

/// Parses the task, reduces it to words, scores every word and materializes
/// the policy for the best one. Throws SchemaError for unknown labels or goals
/// grounded on obstacles.
PlanResult plan_task(const std::shared_ptr<const PlanContext>& context, const std::string& task,
                     StateIndex start_state, Execution execution = Execution::Parallel);

/// Plan artifact: scenario summary, scored word table, selected word and the
/// composite policy tables. Deterministic for identical inputs.
nlohmann::json plan_to_json(const PlanContext& context, const PlanResult& plan);

}  // namespace csp
