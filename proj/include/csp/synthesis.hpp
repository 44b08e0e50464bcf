#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "csp/arrival.hpp"
#include "csp/execution.hpp"
#include "csp/feasibility.hpp"
#include "csp/lmdp.hpp"
#include "csp/reach.hpp"
#include "csp/tasklogic.hpp"
#include "csp/world.hpp"

namespace csp {

struct PlannerOptions {
  CdfMode mode = CdfMode::Exact;
  bool deadline_inclusive = false;
  /// Quantile of a leg's (success-conditional) arrival distribution used as
  /// the anchor time of the following leg.
  double arrival_confidence = 0.99;
};

/// Everything forward propagation and execution read. Immutable once built.
struct PlanContext {
  Grid grid;
  EnvironmentSchedule schedule;
  GoalSet goals;
  PolicyEnsemble ensemble;
  ArrivalSet arrivals;
  ReachabilityTensor reach;
  FeasibilitySolution feasibility;
  PlannerOptions options;
};

struct StitchResult {
  double probability = 0.0;
  std::optional<StateIndex> target;
};

/// Feasibility of goal c from state `from` when the previous sub-goal was
/// certified at absolute time tau. At a period start this is the stored
/// kappa / j*; strictly inside period k it is one step of the recursion with
/// every reach anchored at tau and the end-of-period term scaled by
/// kappa^{k+1}.
StitchResult stitch(const PlanContext& ctx, std::size_t goal, StateIndex from, int tau);

/// Target followed from time t onward while pursuing goal c, given the state
/// at t, when t is a period start or the time a previous goal was certified.
std::optional<StateIndex> latch_target(const PlanContext& ctx, std::size_t goal, StateIndex x, int t);

/// Success mass of one leg, by absolute certificate time, from forward
/// evolution of the (state, latched target) distribution under execution
/// semantics.
struct ArrivalDistribution {
  std::vector<double> mass;  // index = absolute time, size horizon + 1

  double total() const;
  /// Smallest t with cumulative mass >= q * total(); nullopt if total is 0.
  std::optional<int> quantile(double q) const;
};

ArrivalDistribution leg_arrival(const PlanContext& ctx, std::size_t goal, StateIndex from, int start_time,
                                std::optional<StateIndex> initial_target);

struct Leg {
  StateIndex from = 0;
  std::size_t goal = 0;
  std::size_t environment = 0;
  /// Anchor time of the leg: 0 for the first, else the previous leg's bound.
  int start_time = 0;
  bool stitched = false;
  double probability = 0.0;
  /// Quantile of this leg's arrival time; anchors the next leg.
  std::optional<int> arrival_bound;
};

struct WordScore {
  Word word;
  double probability = 0.0;
  std::vector<Leg> legs;
  /// Index of the first zero-probability leg, if any.
  std::optional<std::size_t> infeasible_leg;
};

/// Product of per-leg feasibilities. Scoring stops at the first zero leg.
WordScore score_word(const Word& word, const PlanContext& ctx, StateIndex start_state);

std::vector<WordScore> score_words(std::span<const Word> words, const PlanContext& ctx, StateIndex start_state,
                                   Execution execution = Execution::Parallel);

/// argmax probability, ties to the lexicographically smallest word. Throws
/// std::invalid_argument on an empty list.
std::size_t select_word(std::span<const WordScore> scores);

/// Non-stationary task policy for one word. Position m pursues goal word[m];
/// on entering environment k the target j*(word[m], k, x) is latched, and on
/// certifying a goal mid-period the stitch target is latched until the next
/// boundary. An empty target means wait in place.
class CompositePolicy {
 public:
  CompositePolicy(Word word, std::shared_ptr<const PlanContext> context);

  const Word& word() const noexcept { return word_; }
  const PlanContext& context() const noexcept { return *context_; }

  std::optional<StateIndex> entry_target(std::size_t m, std::size_t k, StateIndex x) const;
  std::optional<StateIndex> certificate_target(std::size_t m, StateIndex x, int tau) const;

  /// Controlled dynamics for a latched target; nullptr means self-loop.
  const TransitionMatrix* dynamics(std::size_t k, std::optional<StateIndex> target) const;

  /// Plan artifact: word, goal groundings, and the j* table per (m, k, state).
  nlohmann::json to_json() const;

 private:
  Word word_;
  std::shared_ptr<const PlanContext> context_;
  std::vector<std::int64_t> table_;  // [m][k][i], -1 = wait
};

CompositePolicy materialize_policy(const Word& word, std::shared_ptr<const PlanContext> context);

}  // namespace csp
