#include "csp/synthesis.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "csp/reach.hpp"

namespace csp {

StitchResult stitch(const PlanContext& ctx, std::size_t goal, StateIndex from, int tau) {
  const auto& schedule = ctx.schedule;
  if (tau > schedule.horizon) return {};
  const std::size_t k = active_environment(schedule, tau);
  const auto& sol = ctx.feasibility;
  if (tau == schedule.start(k)) return {sol.kappa(goal, k, from), sol.target(goal, k, from)};

  const bool inclusive = ctx.options.deadline_inclusive;
  const CdfMode mode = ctx.options.mode;
  const StateIndex g = ctx.goals[goal].state;
  const bool has_future = k + 1 < schedule.count();
  const Deterministic period_end{period_end_deadline(schedule, k, inclusive)};

  StitchResult best;
  const std::size_t n = ctx.grid.state_count();
  for (StateIndex j = 0; j < n; ++j) {
    const ArrivalModel* model = arrival_model(ctx.arrivals, k, j);
    if (!model) continue;
    double score;
    if (j == g) {
      score = reach(*model, from, tau, ctx.goals[goal].deadline, mode, inclusive);
    } else {
      if (!has_future) continue;
      const double future = sol.kappa(goal, k + 1, j);
      if (future == 0.0) continue;
      score = reach(*model, from, tau, period_end, mode, inclusive) * future;
    }
    if (score > best.probability) {
      best.probability = score;
      best.target = j;
    }
  }
  return best;
}

std::optional<StateIndex> latch_target(const PlanContext& ctx, std::size_t goal, StateIndex x, int t) {
  return stitch(ctx, goal, x, t).target;
}

double ArrivalDistribution::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

std::optional<int> ArrivalDistribution::quantile(double q) const {
  const double sum = total();
  if (!(sum > 0.0)) return std::nullopt;
  double cumulative = 0.0;
  for (std::size_t t = 0; t < mass.size(); ++t) {
    cumulative += mass[t];
    if (cumulative >= q * sum) return static_cast<int>(t);
  }
  return static_cast<int>(mass.size()) - 1;
}

namespace {

double admit_probability(const DeadlineDistribution& deadline, int t, bool inclusive) {
  double p = 0.0;
  for (const auto& [d, w] : deadline_support(deadline)) {
    if (meets_deadline(t, d, inclusive)) p += w;
  }
  return p;
}

}  // namespace

ArrivalDistribution leg_arrival(const PlanContext& ctx, std::size_t goal, StateIndex from, int start_time,
                                std::optional<StateIndex> initial_target) {
  const auto& schedule = ctx.schedule;
  const int horizon = schedule.horizon;
  const std::size_t n = ctx.grid.state_count();
  const StateIndex g = ctx.goals[goal].state;
  const bool inclusive = ctx.options.deadline_inclusive;

  ArrivalDistribution dist;
  dist.mass.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  if (start_time > horizon) return dist;

  // Mass over (latched target, state); slot n holds "wait in place".
  std::vector<std::vector<double>> slots(n + 1);
  auto slot_of = [n](std::optional<StateIndex> target) { return target ? *target : n; };
  auto ensure = [n](std::vector<double>& v) {
    if (v.empty()) v.assign(n, 0.0);
  };
  ensure(slots[slot_of(initial_target)]);
  slots[slot_of(initial_target)][from] = 1.0;

  for (int t = start_time; t <= horizon; ++t) {
    const std::size_t k = active_environment(schedule, t);
    if (t > start_time && t == schedule.start(k)) {
      std::vector<double> by_state(n, 0.0);
      for (auto& slot : slots) {
        for (StateIndex x = 0; x < slot.size(); ++x) by_state[x] += slot[x];
        slot.clear();
      }
      for (StateIndex x = 0; x < n; ++x) {
        if (by_state[x] == 0.0) continue;
        auto& slot = slots[slot_of(ctx.feasibility.target(goal, k, x))];
        ensure(slot);
        slot[x] += by_state[x];
      }
    }

    double arrived = 0.0;
    for (auto& slot : slots) {
      if (slot.empty()) continue;
      arrived += slot[g];
      slot[g] = 0.0;
    }
    dist.mass[static_cast<std::size_t>(t)] = arrived * admit_probability(ctx.goals[goal].deadline, t, inclusive);
    if (t == horizon) break;

    for (std::size_t j = 0; j < n; ++j) {
      auto& slot = slots[j];
      if (slot.empty()) continue;
      const LmdpSolution* policy = ctx.ensemble.slice(k, j);
      if (!policy) continue;  // blocked target: hold in place
      std::vector<double> next(n, 0.0);
      for (StateIndex x = 0; x < n; ++x) {
        const double m = slot[x];
        if (m == 0.0) continue;
        for (const auto& e : policy->u.row(x)) next[e.to] += m * e.p;
      }
      slot.swap(next);
    }
  }
  return dist;
}

WordScore score_word(const Word& word, const PlanContext& ctx, StateIndex start_state) {
  WordScore score;
  score.word = word;
  score.probability = word.empty() ? 0.0 : 1.0;

  StateIndex from = start_state;
  int tau = 0;
  for (std::size_t m = 0; m < word.size(); ++m) {
    const std::size_t c = word[m];
    Leg leg;
    leg.from = from;
    leg.goal = c;
    leg.start_time = tau;
    if (tau > ctx.schedule.horizon) {
      score.legs.push_back(leg);
      score.infeasible_leg = m;
      score.probability = 0.0;
      break;
    }
    leg.environment = active_environment(ctx.schedule, tau);
    leg.stitched = tau != ctx.schedule.start(leg.environment);

    const StitchResult s = stitch(ctx, c, from, tau);
    leg.probability = s.probability;
    if (s.probability > 0.0) {
      leg.arrival_bound = leg_arrival(ctx, c, from, tau, s.target).quantile(ctx.options.arrival_confidence);
    }
    score.legs.push_back(leg);
    score.probability *= s.probability;

    if (s.probability == 0.0 || !leg.arrival_bound) {
      score.infeasible_leg = s.probability == 0.0 ? m : m + 1;
      score.probability = 0.0;
      break;
    }
    from = ctx.goals[c].state;
    tau = *leg.arrival_bound;
  }
  return score;
}

std::vector<WordScore> score_words(std::span<const Word> words, const PlanContext& ctx, StateIndex start_state,
                                   Execution execution) {
  std::vector<WordScore> scores(words.size());
  const auto count = static_cast<std::ptrdiff_t>(words.size());
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t w = 0; w < count; ++w) scores[w] = score_word(words[w], ctx, start_state);
  } else {
    for (std::ptrdiff_t w = 0; w < count; ++w) scores[w] = score_word(words[w], ctx, start_state);
  }
  return scores;
}

std::size_t select_word(std::span<const WordScore> scores) {
  if (scores.empty()) throw std::invalid_argument("no words to select from");
  std::size_t best = 0;
  for (std::size_t w = 1; w < scores.size(); ++w) {
    const auto& a = scores[w];
    const auto& b = scores[best];
    if (a.probability > b.probability || (a.probability == b.probability && a.word < b.word)) best = w;
  }
  return best;
}

CompositePolicy::CompositePolicy(Word word, std::shared_ptr<const PlanContext> context)
    : word_(std::move(word)), context_(std::move(context)) {
  const std::size_t envs = context_->schedule.count();
  const std::size_t n = context_->grid.state_count();
  table_.assign(word_.size() * envs * n, FeasibilitySolution::kNoTarget);
  for (std::size_t m = 0; m < word_.size(); ++m) {
    for (std::size_t k = 0; k < envs; ++k) {
      for (StateIndex i = 0; i < n; ++i) {
        if (auto j = context_->feasibility.target(word_[m], k, i)) {
          table_[(m * envs + k) * n + i] = static_cast<std::int64_t>(*j);
        }
      }
    }
  }
}

std::optional<StateIndex> CompositePolicy::entry_target(std::size_t m, std::size_t k, StateIndex x) const {
  const std::size_t envs = context_->schedule.count();
  const std::size_t n = context_->grid.state_count();
  const std::int64_t j = table_.at((m * envs + k) * n + x);
  if (j == FeasibilitySolution::kNoTarget) return std::nullopt;
  return static_cast<StateIndex>(j);
}

std::optional<StateIndex> CompositePolicy::certificate_target(std::size_t m, StateIndex x, int tau) const {
  return latch_target(*context_, word_.at(m), x, tau);
}

const TransitionMatrix* CompositePolicy::dynamics(std::size_t k, std::optional<StateIndex> target) const {
  if (!target) return nullptr;
  const LmdpSolution* slice = context_->ensemble.slice(k, *target);
  return slice ? &slice->u : nullptr;
}

nlohmann::json CompositePolicy::to_json() const {
  const auto& ctx = *context_;
  const std::size_t envs = ctx.schedule.count();
  const std::size_t n = ctx.grid.state_count();
  nlohmann::json labels = nlohmann::json::array();
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t c : word_) {
    labels.push_back(ctx.goals[c].label);
    states.push_back(ctx.goals[c].state);
  }
  nlohmann::json targets = nlohmann::json::array();
  for (std::size_t m = 0; m < word_.size(); ++m) {
    nlohmann::json per_env = nlohmann::json::array();
    for (std::size_t k = 0; k < envs; ++k) {
      const auto begin = table_.begin() + static_cast<std::ptrdiff_t>((m * envs + k) * n);
      per_env.push_back(std::vector<std::int64_t>(begin, begin + static_cast<std::ptrdiff_t>(n)));
    }
    targets.push_back(std::move(per_env));
  }
  return {{"word", labels},
          {"goal_states", states},
          {"environment_starts", ctx.schedule.starts},
          {"horizon", ctx.schedule.horizon},
          {"targets", targets}};
}

CompositePolicy materialize_policy(const Word& word, std::shared_ptr<const PlanContext> context) {
  return CompositePolicy(word, std::move(context));
}

}  // namespace csp
