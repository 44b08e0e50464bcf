#include "csp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

namespace csp {

namespace {

class EpisodeRng {
 public:
  explicit EpisodeRng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
  }

  // 53-bit uniform in [0, 1); independent of the standard library's
  // distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

int sample_deadline(const DeadlineDistribution& deadline, EpisodeRng& rng) {
  if (const auto* det = std::get_if<Deterministic>(&deadline)) return det->time;
  const auto& support = std::get<DiscretePmf>(deadline).support;
  const double r = rng.uniform();
  double cumulative = 0.0;
  for (const auto& [t, p] : support) {
    cumulative += p;
    if (r < cumulative) return t;
  }
  return support.back().first;
}

StateIndex sample_next(const TransitionMatrix* u, StateIndex x, EpisodeRng& rng) {
  if (!u) return x;
  const auto row = u->row(x);
  const double r = rng.uniform();
  double cumulative = 0.0;
  for (const auto& e : row) {
    cumulative += e.p;
    if (r < cumulative) return e.to;
  }
  return row.back().to;
}

}  // namespace

Episode rollout(const CompositePolicy& policy, StateIndex start_state, std::uint64_t seed) {
  const PlanContext& ctx = policy.context();
  const auto& schedule = ctx.schedule;
  const Word& word = policy.word();
  const bool inclusive = ctx.options.deadline_inclusive;

  EpisodeRng rng(seed);
  Episode ep;
  ep.seed = seed;
  ep.deadlines.reserve(ctx.goals.size());
  for (const Goal& g : ctx.goals.goals) ep.deadlines.push_back(sample_deadline(g.deadline, rng));

  StateIndex x = start_state;
  std::optional<StateIndex> target;
  std::size_t m = 0;
  for (int t = 0; t <= schedule.horizon; ++t) {
    ep.trajectory.push_back(x);
    const std::size_t k = active_environment(schedule, t);
    if (m < word.size() && t == schedule.start(k)) target = policy.entry_target(m, k, x);

    while (m < word.size() && x == ctx.goals[word[m]].state &&
           meets_deadline(t, ep.deadlines[word[m]], inclusive)) {
      ep.certificates.push_back({x, t});
      ++m;
      if (m < word.size()) target = policy.certificate_target(m, x, t);
    }
    if (m == word.size() || t == schedule.horizon) break;
    x = sample_next(policy.dynamics(k, target), x, rng);
  }
  ep.position = m;
  ep.success = !word.empty() && m == word.size();
  return ep;
}

nlohmann::json to_json(const Episode& ep) {
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : ep.certificates) certs.push_back({{"state", c.state}, {"time", c.time}});
  return {{"seed", ep.seed},       {"trajectory", ep.trajectory}, {"certificates", certs},
          {"deadlines", ep.deadlines}, {"success", ep.success},   {"position", ep.position}};
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

struct Tally {
  std::size_t successes = 0;
  std::vector<std::size_t> certified;
  std::vector<std::uint64_t> arrival_sum;
  std::vector<std::vector<std::size_t>> histogram;

  Tally(std::size_t legs, std::size_t times)
      : certified(legs, 0), arrival_sum(legs, 0), histogram(legs, std::vector<std::size_t>(times, 0)) {}

  void add(const Episode& ep) {
    successes += ep.success ? 1 : 0;
    for (std::size_t m = 0; m < ep.certificates.size(); ++m) {
      const int t = ep.certificates[m].time;
      ++certified[m];
      arrival_sum[m] += static_cast<std::uint64_t>(t);
      ++histogram[m][static_cast<std::size_t>(t)];
    }
  }

  void merge(const Tally& other) {
    successes += other.successes;
    for (std::size_t m = 0; m < certified.size(); ++m) {
      certified[m] += other.certified[m];
      arrival_sum[m] += other.arrival_sum[m];
      for (std::size_t t = 0; t < histogram[m].size(); ++t) histogram[m][t] += other.histogram[m][t];
    }
  }
};

}  // namespace

MonteCarloResult monte_carlo(const CompositePolicy& policy, StateIndex start_state,
                             const MonteCarloOptions& options) {
  const std::size_t legs = policy.word().size();
  const std::size_t times = static_cast<std::size_t>(policy.context().schedule.horizon) + 1;

  MonteCarloResult result;
  result.episodes = options.episodes;
  result.z = options.z;
  if (options.keep_episodes) result.kept.resize(options.episodes);

  Tally total(legs, times);
  const auto count = static_cast<std::ptrdiff_t>(options.episodes);
  auto run = [&](std::ptrdiff_t e, Tally& tally) {
    Episode ep = rollout(policy, start_state, options.base_seed + static_cast<std::uint64_t>(e));
    tally.add(ep);
    if (options.keep_episodes) result.kept[static_cast<std::size_t>(e)] = std::move(ep);
  };

  if (options.execution == Execution::Parallel) {
#pragma omp parallel
    {
      Tally local(legs, times);
#pragma omp for schedule(static)
      for (std::ptrdiff_t e = 0; e < count; ++e) run(e, local);
#pragma omp critical
      total.merge(local);
    }
  } else {
    for (std::ptrdiff_t e = 0; e < count; ++e) run(e, total);
  }

  result.successes = total.successes;
  result.rate = options.episodes ? static_cast<double>(total.successes) / static_cast<double>(options.episodes) : 0.0;
  std::tie(result.lower, result.upper) = wilson_interval(total.successes, options.episodes, options.z);
  for (std::size_t m = 0; m < legs; ++m) {
    LegStatistics leg;
    leg.certified = total.certified[m];
    leg.mean_arrival = leg.certified ? static_cast<double>(total.arrival_sum[m]) / static_cast<double>(leg.certified)
                                     : 0.0;
    leg.arrival_counts = std::move(total.histogram[m]);
    result.legs.push_back(std::move(leg));
  }
  return result;
}

nlohmann::json to_json(const MonteCarloResult& r) {
  nlohmann::json legs = nlohmann::json::array();
  for (const auto& leg : r.legs) {
    legs.push_back({{"certified", leg.certified},
                    {"mean_arrival", leg.mean_arrival},
                    {"arrival_counts", leg.arrival_counts}});
  }
  return {{"episodes", r.episodes}, {"successes", r.successes}, {"rate", r.rate},
          {"interval", {{"lower", r.lower}, {"upper", r.upper}, {"z", r.z}}}, {"legs", legs}};
}

}  // namespace csp
