#include "csp/pipeline.hpp"

#include <chrono>
#include <map>
#include <stdexcept>

#include "csp/error.hpp"
#include "csp/serialize.hpp"

namespace csp {

namespace {

Digest hash(const ByteWriter& w) { return sha256(w.data()); }

void put_key(ByteWriter& w, const Digest& key) {
  for (auto b : key) w.u8(b);
}

void put_deadline(ByteWriter& w, const DeadlineDistribution& deadline) {
  if (const auto* det = std::get_if<Deterministic>(&deadline)) {
    w.u8(0);
    w.i64(det->time);
    return;
  }
  const auto& support = std::get<DiscretePmf>(deadline).support;
  w.u8(1);
  w.u64(support.size());
  for (const auto& [t, p] : support) {
    w.i64(t);
    w.f64(p);
  }
}

Digest policy_key(const Grid& grid, const ObstacleSet& obstacles, const LmdpOptions& options) {
  ByteWriter w;
  w.str("policy");
  w.i64(grid.width);
  w.i64(grid.height);
  w.u64(obstacles.size());
  for (StateIndex s : obstacles) w.u64(s);
  w.f64(options.epsilon);
  w.f64(options.tolerance);
  w.u64(options.max_iterations);
  return hash(w);
}

Digest derived_key(std::string_view kind, const Digest& parent, int horizon, CdfMode mode) {
  ByteWriter w;
  w.str(kind);
  put_key(w, parent);
  w.i64(horizon);
  w.u8(static_cast<std::uint8_t>(mode));
  return hash(w);
}

class Timer {
 public:
  Timer() : begin_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
  }

 private:
  std::chrono::steady_clock::time_point begin_;
};

}  // namespace

Pipeline::Pipeline(Scenario scenario, PipelineOptions options, ArtifactCache cache)
    : scenario_(std::move(scenario)), options_(options), cache_(std::move(cache)) {}

const StageReport* Pipeline::report(std::string_view name) const {
  for (const auto& r : reports_) {
    if (r.stage == name) return &r;
  }
  return nullptr;
}

StageReport& Pipeline::stage(std::string_view name) {
  for (auto& r : reports_) {
    if (r.stage == name) return r;
  }
  StageReport& r = reports_.emplace_back();
  r.stage = std::string(name);
  return r;
}

void Pipeline::solve() {
  if (solved_) return;
  const Grid& grid = scenario_.grid;
  const auto& schedule = scenario_.schedule;
  const int horizon = schedule.horizon;
  const CdfMode mode = options_.planner.mode;
  const Execution exec = options_.execution;
  const std::size_t envs = schedule.count();

  // Work is done once per distinct obstacle set, in order of first use.
  std::map<ObstacleSet, std::size_t> first_use;
  std::vector<std::size_t> group(envs);
  std::vector<std::size_t> representatives;
  for (std::size_t k = 0; k < envs; ++k) {
    auto [it, inserted] = first_use.emplace(schedule.obstacles[k], representatives.size());
    if (inserted) representatives.push_back(k);
    group[k] = it->second;
  }
  const std::size_t distinct = representatives.size();

  std::vector<Digest> pkeys(distinct), akeys(distinct), rkeys(distinct);
  std::vector<std::string> pdig(distinct), adig(distinct), rdig(distinct);
  std::vector<std::shared_ptr<const EnvironmentPolicies>> pol(distinct);
  std::vector<std::shared_ptr<const EnvironmentArrivals>> arr(distinct);
  std::vector<std::shared_ptr<const EnvironmentReach>> rch(distinct);

  // Loads an artifact or computes and stores it; returns the payload digest.
  auto resolve = [&](StageReport& rep, std::string_view kind, const Digest& key, auto&& compute,
                     auto&& decode, auto& slot) {
    if (auto bytes = cache_.load(kind, key)) {
      try {
        slot = std::make_shared<std::remove_cvref_t<decltype(decode(*bytes))>>(decode(*bytes));
        ++rep.hits;
        rep.bytes += bytes->size();
        return to_hex(sha256(*bytes));
      } catch (const std::exception&) {
        // checksum passed but payload does not decode; recompute
      }
    }
    auto value = compute();
    const auto payload = serialize(value);
    cache_.store(kind, key, payload);
    slot = std::make_shared<decltype(value)>(std::move(value));
    ++rep.misses;
    rep.bytes += payload.size();
    return to_hex(sha256(payload));
  };

  {
    StageReport& rep = stage("ensemble");
    Timer timer;
    for (std::size_t g = 0; g < distinct; ++g) {
      const std::size_t k = representatives[g];
      pkeys[g] = policy_key(grid, schedule.obstacles[k], options_.lmdp);
      pdig[g] = resolve(
          rep, "policy", pkeys[g],
          [&] {
            try {
              return solve_environment(grid, schedule.obstacles[k], options_.lmdp, exec);
            } catch (const NonConvergence& e) {
              throw NonConvergence("environment " + std::to_string(k + 1) + ", " + e.what());
            }
          },
          deserialize_policies, pol[g]);
    }
    rep.seconds += timer.seconds();
  }
  {
    StageReport& rep = stage("arrival");
    Timer timer;
    for (std::size_t g = 0; g < distinct; ++g) {
      akeys[g] = derived_key("arrival", pkeys[g], horizon, mode);
      adig[g] = resolve(
          rep, "arrival", akeys[g],
          [&] {
            try {
              return build_environment_arrivals(*pol[g], horizon, mode, exec);
            } catch (const NumericalError& e) {
              throw SingularSystem("environment " + std::to_string(representatives[g] + 1) + ", " + e.what());
            }
          },
          deserialize_arrivals, arr[g]);
    }
    rep.seconds += timer.seconds();
  }
  {
    StageReport& rep = stage("reach");
    Timer timer;
    const std::size_t n = grid.state_count();
    for (std::size_t g = 0; g < distinct; ++g) {
      rkeys[g] = derived_key("reach", akeys[g], horizon, mode);
      rdig[g] = resolve(
          rep, "reach", rkeys[g], [&] { return build_environment_reach(*arr[g], n, horizon, mode, exec); },
          deserialize_reach, rch[g]);
    }
    rep.seconds += timer.seconds();
  }

  policies_.clear();
  arrivals_.clear();
  reach_.clear();
  reach_keys_.clear();
  for (std::size_t k = 0; k < envs; ++k) {
    const std::size_t g = group[k];
    policies_.push_back(pol[g]);
    arrivals_.push_back(arr[g]);
    reach_.push_back(rch[g]);
    reach_keys_.push_back(rkeys[g]);
    stage("ensemble").digests.push_back(pdig[g]);
    stage("arrival").digests.push_back(adig[g]);
    stage("reach").digests.push_back(rdig[g]);
  }
  solved_ = true;
}

std::shared_ptr<const PlanContext> Pipeline::plan_context() {
  if (context_) return context_;
  solve();
  const auto& schedule = scenario_.schedule;
  const auto& goals = scenario_.goals;
  const CdfMode mode = options_.planner.mode;
  const bool inclusive = options_.planner.deadline_inclusive;
  const Execution exec = options_.execution;
  const std::size_t envs = schedule.count();
  const std::size_t n = scenario_.grid.state_count();

  // Goal slices of environment k depend on its arrival models, its start
  // time and the goal deadlines.
  std::vector<double> goal_values(envs * goals.size() * n * n, 0.0);
  std::vector<Digest> goal_keys(envs);
  {
    StageReport& rep = stage("goal_slices");
    Timer timer;
    for (std::size_t k = 0; k < envs; ++k) {
      ByteWriter w;
      w.str("goal_slices");
      put_key(w, reach_keys_[k]);
      w.i64(schedule.start(k));
      w.u8(inclusive ? 1 : 0);
      w.u64(goals.size());
      for (const Goal& g : goals.goals) {
        w.u64(g.state);
        put_deadline(w, g.deadline);
      }
      goal_keys[k] = hash(w);

      const std::size_t span = goals.size() * n * n;
      double* out = goal_values.data() + k * span;
      std::vector<double> values;
      bool hit = false;
      if (auto bytes = cache_.load("goal_slices", goal_keys[k])) {
        try {
          ByteReader r(*bytes);
          values = r.f64s();
          hit = values.size() == span && r.done();
        } catch (const std::exception&) {
          hit = false;
        }
        if (hit) rep.bytes += bytes->size();
      }
      if (!hit) {
        EnvironmentSchedule single;
        single.obstacles = {schedule.obstacles[k]};
        single.starts = {schedule.start(k)};
        single.horizon = schedule.horizon;
        const ArrivalSet one{arrivals_[k]};
        const ReachabilityTensor t = build_tensor(one, {reach_[k]}, single, goals, mode, inclusive, exec);
        values = t.goal_values();
        ByteWriter payload;
        payload.f64s(values);
        cache_.store("goal_slices", goal_keys[k], payload.data());
        rep.bytes += payload.data().size();
      }
      ++(hit ? rep.hits : rep.misses);
      std::copy(values.begin(), values.end(), out);
      ByteWriter d;
      d.f64s(values);
      rep.digests.push_back(to_hex(sha256(d.data())));
    }
    rep.seconds += timer.seconds();
  }

  ReachabilityTensor tensor(reach_, n, goals.size(), schedule.horizon, std::move(goal_values));

  FeasibilitySolution feasibility;
  {
    StageReport& rep = stage("feasibility");
    Timer timer;
    ByteWriter w;
    w.str("feasibility");
    w.u64(envs);
    for (std::size_t k = 0; k < envs; ++k) {
      put_key(w, reach_keys_[k]);
      put_key(w, goal_keys[k]);
      w.i64(schedule.start(k));
    }
    w.i64(schedule.horizon);
    const Digest key = hash(w);

    bool hit = false;
    if (auto bytes = cache_.load("feasibility", key)) {
      try {
        feasibility = deserialize_feasibility(*bytes);
        hit = feasibility.goal_count() == goals.size() && feasibility.environment_count() == envs &&
              feasibility.state_count() == n;
      } catch (const std::exception&) {
        hit = false;
      }
    }
    if (!hit) feasibility = backward_recursion(tensor, schedule, goals, exec);
    const auto payload = serialize(feasibility);
    if (!hit) cache_.store("feasibility", key, payload);
    ++(hit ? rep.hits : rep.misses);
    rep.bytes += payload.size();
    rep.digests.push_back(to_hex(sha256(payload)));
    rep.seconds += timer.seconds();
  }

  auto ctx = std::make_shared<PlanContext>();
  ctx->grid = scenario_.grid;
  ctx->schedule = schedule;
  ctx->goals = goals;
  ctx->ensemble = PolicyEnsemble(policies_, options_.lmdp.epsilon);
  ctx->arrivals = arrivals_;
  ctx->reach = std::move(tensor);
  ctx->feasibility = std::move(feasibility);
  ctx->options = options_.planner;
  context_ = std::move(ctx);
  return context_;
}

PlanResult plan_task(const std::shared_ptr<const PlanContext>& context, const std::string& task,
                     StateIndex start_state, Execution execution) {
  const PlanContext& ctx = *context;
  const TaskAst ast = parse(task);
  const auto labels = collect_labels(ast);

  Scenario grounding{ctx.grid, ctx.schedule, ctx.goals, task, start_state};
  validate_task_groundings(grounding, labels);

  PlanResult plan;
  const auto goal_labels = ctx.goals.labels();
  plan.words = to_dnf(ast, goal_labels);
  plan.scores = score_words(plan.words, ctx, start_state, execution);
  plan.best = select_word(plan.scores);
  plan.policy = std::make_shared<const CompositePolicy>(plan.scores[plan.best].word, context);
  return plan;
}

namespace {

nlohmann::json score_json(const PlanContext& ctx, const WordScore& score) {
  nlohmann::json labels = nlohmann::json::array();
  for (std::size_t c : score.word) labels.push_back(ctx.goals[c].label);
  nlohmann::json legs = nlohmann::json::array();
  for (const Leg& leg : score.legs) {
    nlohmann::json j = {{"goal", ctx.goals[leg.goal].label},
                        {"from", leg.from},
                        {"environment", leg.environment + 1},
                        {"start_time", leg.start_time},
                        {"stitched", leg.stitched},
                        {"probability", leg.probability}};
    j["arrival_bound"] = leg.arrival_bound ? nlohmann::json(*leg.arrival_bound) : nlohmann::json();
    legs.push_back(std::move(j));
  }
  nlohmann::json out = {{"word", labels}, {"probability", score.probability}, {"legs", legs}};
  if (score.infeasible_leg) {
    const std::size_t m = *score.infeasible_leg;
    out["infeasible_leg"] = m;
    if (m < score.word.size()) out["infeasible_goal"] = ctx.goals[score.word[m]].label;
  } else {
    out["infeasible_leg"] = nullptr;
  }
  return out;
}

}  // namespace

nlohmann::json plan_to_json(const PlanContext& ctx, const PlanResult& plan) {
  nlohmann::json goals = nlohmann::json::array();
  for (const Goal& g : ctx.goals.goals) {
    goals.push_back({{"label", g.label}, {"state", g.state}, {"deadline", to_json(g.deadline)}});
  }
  nlohmann::json words = nlohmann::json::array();
  for (const auto& s : plan.scores) words.push_back(score_json(ctx, s));
  return {{"grid", {{"width", ctx.grid.width}, {"height", ctx.grid.height}}},
          {"horizon", ctx.schedule.horizon},
          {"environment_starts", ctx.schedule.starts},
          {"goals", goals},
          {"options",
           {{"mode", to_string(ctx.options.mode)},
            {"deadline_inclusive", ctx.options.deadline_inclusive},
            {"arrival_confidence", ctx.options.arrival_confidence},
            {"epsilon", ctx.ensemble.epsilon()}}},
          {"words", words},
          {"selected", score_json(ctx, plan.scores.at(plan.best))},
          {"policy", plan.policy->to_json()}};
}

}  // namespace csp
